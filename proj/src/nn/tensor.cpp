#include "ssoct/nn/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "ssoct/error.hpp"

namespace ssoct::nn {

std::size_t shape_numel(const Shape& shape) noexcept {
    std::size_t n = 1;
    for (const auto e : shape) n *= e;
    return n;
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
    node_->data.assign(shape_numel(shape), T{});
    node_->shape = std::move(shape);
    node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
    if (values.size() != shape_numel(shape)) {
        throw DimensionError("tensor data length " + std::to_string(values.size()) + " does not match shape " +
                             shape_string(shape));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(values);
    node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
    return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_node(std::shared_ptr<Node<T>> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

template <typename T>
T Tensor<T>::item() const {
    if (numel() != 1) throw UsageError("item() on a tensor of shape " + shape_string(shape()));
    return node_->data[0];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool flag) {
    if (!node_->is_leaf) throw UsageError("requires_grad can only be changed on leaf tensors");
    node_->requires_grad = flag;
}

template <typename T>
void Tensor<T>::zero_grad() {
    if (node_) node_->grad.clear();
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
    return Tensor(node_->shape, node_->data, false);
}

template <typename T>
void Tensor<T>::backward() {
    if (!node_) throw UsageError("backward() on an undefined tensor");
    if (numel() != 1) throw UsageError("backward() needs a scalar, got shape " + shape_string(shape()));
    if (node_->consumed) throw UsageError("backward() called twice on the same graph; rebuild it first");
    if (!node_->requires_grad) throw UsageError("backward() on a tensor that does not require gradients");

    // iterative post-order DFS
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> visited;
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* parent = node->parents[next++].get();
            if (parent->requires_grad && !visited.count(parent)) {
                if (parent->consumed) {
                    throw UsageError("backward() reached a node whose graph was already consumed");
                }
                visited.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    node_->ensure_grad()[0] += T{1};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* node = *it;
        if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
    }
    for (Node<T>* node : order) {
        if (node->is_leaf) continue;
        node->consumed = true;
        node->backward_fn = nullptr;
        node->parents.clear();
        if (node != node_.get()) {
            node->grad.clear();
            node->grad.shrink_to_fit();
        }
    }
}

namespace {
thread_local bool g_no_grad = false;
}

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() noexcept { return g_no_grad; }

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values, std::vector<Tensor<T>> inputs,
                      std::function<void(Node<T>&)> backward_fn) {
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->data = std::move(values);
    node->is_leaf = false;
    const bool needs_grad = !g_no_grad && std::any_of(inputs.begin(), inputs.end(),
                                        [](const Tensor<T>& t) { return t.defined() && t.requires_grad(); });
    if (needs_grad) {
        node->requires_grad = true;
        for (auto& in : inputs) {
            if (in.defined()) node->parents.push_back(in.node());
        }
        node->backward_fn = std::move(backward_fn);
    }
    return Tensor<T>::from_node(std::move(node));
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> make_result(Shape, std::vector<float>, std::vector<Tensor<float>>,
                                   std::function<void(Node<float>&)>);
template Tensor<double> make_result(Shape, std::vector<double>, std::vector<Tensor<double>>,
                                    std::function<void(Node<double>&)>);

}  // namespace ssoct::nn
