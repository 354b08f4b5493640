#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "temp_dir.hpp"
#include "ssoct/checkpoint.hpp"
#include "ssoct/dataset.hpp"
#include "ssoct/error.hpp"
#include "ssoct/training.hpp"

using namespace ssoct;
using oracle::TempDir;

namespace {

// 128 sweep samples give 64-row images and 16-row patches.
DatasetSpec toy_spec(std::size_t frames) {
    DatasetSpec spec;
    spec.sweep.n_samples = 128;
    spec.n_alines = 16;
    spec.frames_per_volume = frames;
    spec.gt_repeats = 3;
    spec.seed = 17;
    return spec;
}

ModelConfig toy_model(std::size_t base) {
    ModelConfig cfg;
    cfg.base_channels = base;
    cfg.patch_height = 16;
    cfg.patch_width = 16;
    return cfg;
}

struct ToyData {
    SweepContext ctx;
    FrameGeometry geom;
    std::vector<TrainingPatch> patches;
};

ToyData toy_data(std::size_t frames) {
    const auto spec = toy_spec(frames);
    ToyData d{SweepContext::create(spec.sweep, spec.family.reference_reflectivity), {}, {}};
    d.geom = FrameGeometry::create(64, d.ctx.k_lo(), d.ctx.k_hi());
    for (std::size_t f = 0; f < frames; ++f) {
        const auto pair = generate_frame(spec, d.ctx, 0, f);
        for (auto& p : prepare_pair(pair.input.intensity_db, pair.ground_truth.intensity_db, d.geom)) {
            d.patches.push_back(std::move(p));
        }
    }
    return d;
}

std::vector<std::vector<float>> snapshot(const WaveUnet<float>& model) {
    std::vector<std::vector<float>> out;
    for (const auto& [name, t] : model.named_parameters()) out.emplace_back(t.data().begin(), t.data().end());
    return out;
}

}  // namespace

TEST(TrainConfig, Validation) {
    TrainConfig cfg;
    EXPECT_EQ(cfg.epochs, 150u);
    EXPECT_EQ(cfg.batch_size, 12u);
    EXPECT_DOUBLE_EQ(cfg.lr, 1e-4);
    EXPECT_NO_THROW(cfg.validate());
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.lr = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(PreparePair, TargetSharesInputStatistics) {
    const auto d = toy_data(1);
    const auto spec = toy_spec(1);
    const auto pair = generate_frame(spec, d.ctx, 0, 0);
    const auto stats = prepare_input(pair.input.intensity_db, d.geom);
    const auto patches = prepare_pair(pair.input.intensity_db, pair.ground_truth.intensity_db, d.geom);
    for (std::size_t i = 0; i < kPatchesPerImage; ++i) {
        const double mu = stats[i].mean, sd = stats[i].stddev;
        for (std::size_t r = 0; r < 16; ++r) {
            for (std::size_t c = 0; c < 16; ++c) {
                const double gt = pair.ground_truth.intensity_db(i * 16 + r, c);
                EXPECT_NEAR(patches[i].target(r, c), (gt - mu) / (sd + 1e-8), 1e-12);
            }
        }
    }
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
    const auto d = toy_data(1);
    WaveUnet<float> model(toy_model(2), 3);
    const auto before = snapshot(model);
    nn::AdamState<float> adam;
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 2;
    cfg.lr = 0.0;
    train(model, adam, d.patches, {}, cfg);
    EXPECT_EQ(snapshot(model), before);
}

TEST(Train, IdenticalSeedsGiveIdenticalHistories) {
    const auto d = toy_data(2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 3;
    cfg.lr = 1e-3;
    cfg.seed = 8;
    auto run = [&] {
        WaveUnet<float> model(toy_model(2), 4);
        nn::AdamState<float> adam;
        auto r = train(model, adam, d.patches, std::span(d.patches).first(2), cfg);
        return std::pair{r.history, snapshot(model)};
    };
    const auto [ha, pa] = run();
    const auto [hb, pb] = run();
    ASSERT_EQ(ha.size(), 3u);
    for (std::size_t i = 0; i < ha.size(); ++i) {
        EXPECT_EQ(ha[i].train_loss, hb[i].train_loss);
        EXPECT_EQ(ha[i].val_loss, hb[i].val_loss);
        EXPECT_EQ(ha[i].steps, 3 * (i + 1));
    }
    EXPECT_EQ(pa, pb);
}

TEST(Train, ToyOverfitOnTwoFrames) {
    // Two frames, full-batch steps: one optimizer step per epoch.
    const auto d = toy_data(2);
    ASSERT_EQ(d.patches.size(), 8u);
    WaveUnet<float> model(toy_model(2), 1);
    nn::AdamState<float> adam;
    TrainConfig cfg;
    cfg.epochs = 2000;
    cfg.batch_size = 8;
    cfg.lr = 1e-3;
    cfg.seed = 1;
    const auto result = train(model, adam, d.patches, {}, cfg);
    for (std::size_t e = 1; e < 10; ++e) {
        EXPECT_LT(result.history[e].train_loss, result.history[e - 1].train_loss) << "epoch " << e + 1;
    }
    std::size_t reached = 0;
    for (const auto& r : result.history) {
        if (r.train_loss < 1e-3) {
            reached = r.steps;
            break;
        }
    }
    double best = result.history.front().train_loss;
    for (const auto& r : result.history) best = std::min(best, r.train_loss);
    EXPECT_GT(reached, 0u) << "lowest train loss " << best;
}

TEST(Train, NonFiniteLossNamesTheBatch) {
    auto d = toy_data(1);
    d.patches[2].target(0, 0) = std::numeric_limits<double>::quiet_NaN();
    WaveUnet<float> model(toy_model(2), 1);
    nn::AdamState<float> adam;
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    try {
        train(model, adam, d.patches, {}, cfg);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos) << e.what();
    }
}

TEST(Train, WritesHistoryAndCheckpoints) {
    const auto d = toy_data(1);
    TempDir dir("train");
    WaveUnet<float> model(toy_model(2), 1);
    nn::AdamState<float> adam;
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 2;
    cfg.lr = 1e-3;
    cfg.checkpoint_every = 1;
    const auto result = train(model, adam, d.patches, std::span(d.patches).first(1), cfg, dir.path());
    std::ifstream in(dir / "history.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "epoch,steps,train_loss,val_loss");
    EXPECT_EQ(lines[1].rfind("1,2,", 0), 0u);
    for (const char* f : {"best.wun1", "final.wun1", "epoch_1.wun1", "epoch_2.wun1"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    const auto final_ckpt = load_checkpoint(dir / "final.wun1");
    EXPECT_EQ(final_ckpt.epoch, 2);
    EXPECT_EQ(final_ckpt.adam_step, 4);
    EXPECT_EQ(load_checkpoint(dir / "best.wun1").epoch, static_cast<std::int64_t>(result.best_epoch));
}

TEST(InferVolume, CountsRepeatabilityAndGeometry) {
    const auto spec = toy_spec(3);
    const auto ctx = SweepContext::create(spec.sweep, spec.family.reference_reflectivity);
    std::vector<FringeFrame> frames;
    for (std::size_t f = 0; f < 3; ++f) frames.push_back(frame_realizations(spec, ctx, 0, f, 1).front());
    WaveUnet<float> model(toy_model(2), 2);
    const auto a = infer_volume(model, frames, ctx.background, ctx.kgrid);
    const auto b = infer_volume(model, frames, ctx.background, ctx.kgrid);
    ASSERT_EQ(a.images.size(), 3u);
    EXPECT_EQ(a.latency.network_frame_s.size(), 3u);
    EXPECT_EQ(a.latency.classic_frame_s.size(), 3u);
    EXPECT_GT(a.latency.network_total_s, 0.0);
    EXPECT_GT(a.latency.classic_total_s, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.images[i].intensity_db.rows(), 64u);
        EXPECT_EQ(a.images[i].intensity_db, b.images[i].intensity_db);
        EXPECT_EQ(a.images[i].meta, Provenance::network_output);
    }
    const auto csv = latency_csv(a.latency);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "frames,classic_total_s,network_total_s,ratio");

    WaveUnet<float> wrong(toy_model(2), 2);
    ModelConfig wide = toy_model(2);
    wide.patch_width = 32;
    WaveUnet<float> mismatched(wide, 2);
    EXPECT_THROW(infer_volume(mismatched, frames, ctx.background, ctx.kgrid), ConfigError);
    EXPECT_THROW(infer_volume(wrong, std::span<const FringeFrame>{}, ctx.background, ctx.kgrid), UsageError);
}

TEST(NoGrad, GuardSuppressesGraphAndRestores) {
    nn::Tensor<double> x({2}, {1.0, 2.0}, true);
    EXPECT_FALSE(nn::NoGradGuard::active());
    {
        nn::NoGradGuard guard;
        EXPECT_TRUE(nn::NoGradGuard::active());
        {
            nn::NoGradGuard nested;
        }
        EXPECT_TRUE(nn::NoGradGuard::active());
        EXPECT_FALSE(nn::sum(nn::mul(x, x)).requires_grad());
    }
    EXPECT_FALSE(nn::NoGradGuard::active());
    EXPECT_TRUE(nn::sum(nn::mul(x, x)).requires_grad());
}
