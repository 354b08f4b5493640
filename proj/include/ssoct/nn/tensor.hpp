#pragma once

// Reverse-mode automatic differentiation over NCHW tensors.
//
// Each operation records its inputs and a backward closure on the result node.
// Tensor::backward() on a scalar runs the closures in reverse topological
// order, accumulating into the .grad of every tensor that requires it. A graph
// is consumed by backward(): intermediate nodes release their closures, and a
// second backward() over the same graph raises UsageError. Leaf gradients keep
// accumulating across graphs until zero_grad().

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ssoct::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until a gradient reaches this node
    bool requires_grad = false;
    bool is_leaf = true;
    bool consumed = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    std::vector<T>& ensure_grad() {
        if (grad.empty()) grad.assign(data.size(), T{});
        return grad;
    }
};

template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false);
    Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

    static Tensor scalar(T value, bool requires_grad = false);

    bool defined() const noexcept { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return node_->data.size(); }

    std::span<T> data() { return node_->data; }
    std::span<const T> data() const { return node_->data; }
    T item() const;

    bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
    void set_requires_grad(bool flag);
    bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
    /// Empty span when no gradient has reached this tensor.
    std::span<const T> grad() const { return node_->grad; }
    std::span<T> mutable_grad() { return node_->ensure_grad(); }
    void zero_grad();

    /// Copy of the values with no graph attached.
    Tensor detach() const;

    /// Reverse-mode sweep from this scalar.
    void backward();

    const std::shared_ptr<Node<T>>& node() const noexcept { return node_; }
    static Tensor from_node(std::shared_ptr<Node<T>> node);

private:
    std::shared_ptr<Node<T>> node_;
};

/// While alive, operations on this thread record no graph (inference).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

    static bool active() noexcept;

private:
    bool previous_;
};

/// Builds an op result; records the graph only when some input needs gradients.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values, std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward_fn);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace ssoct::nn
