#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/planes.hpp"
#include "pgmcts/policy/model.hpp"
#include "pgmcts/random.hpp"

namespace pgmcts::policy {

struct ConvLayerSpec {
    int kernel = 3;
    int filters = 64;
    bool same_padding = true;  // false: no padding, spatial size shrinks by kernel - 1

    bool operator==(const ConvLayerSpec&) const = default;
};

/**
 * Architecture of the convolutional policy network.
 *
 * Input is the padded one-hot board, (height+2) x (width+2) x (colors+1).
 * Every conv layer is followed by ELU; the last feature map is flattened into
 * a linear layer of height*width logits and a softmax.
 */
struct ConvPolicyConfig {
    int board_height = 15;
    int board_width = 15;
    int colors = 5;
    std::vector<ConvLayerSpec> layers;
    std::uint64_t seed = 0;

    int input_channels() const noexcept { return colors + 1; }
    int input_rows() const noexcept { return board_height + 2; }
    int input_cols() const noexcept { return board_width + 2; }
    int output_size() const noexcept { return board_height * board_width; }

    /// 13 layers of 64 filters; 1x1 kernels at layers 11 and 13; layers 9 and 10 unpadded.
    static ConvPolicyConfig full(int height, int width, int colors, std::uint64_t seed = 0) {
        ConvPolicyConfig c{height, width, colors, {}, seed};
        for (int i = 1; i <= 13; ++i) {
            const bool pointwise = i == 11 || i == 13;
            const bool shrink = i == 9 || i == 10;
            c.layers.push_back({pointwise ? 1 : 3, 64, !shrink});
        }
        return c;
    }

    /// Reduced preset for desk-scale runs: 4 layers of 16 filters.
    static ConvPolicyConfig desk(int height, int width, int colors, std::uint64_t seed = 0) {
        return {height, width, colors, {{3, 16, true}, {3, 16, true}, {3, 16, false}, {1, 16, true}}, seed};
    }

    /// Spatial size after every layer; throws ConfigError if a layer would shrink it below 1.
    std::vector<std::pair<int, int>> spatial_sizes() const {
        std::vector<std::pair<int, int>> out;
        int rows = input_rows(), cols = input_cols();
        for (const auto& l : layers) {
            if (!l.same_padding) {
                rows -= l.kernel - 1;
                cols -= l.kernel - 1;
            }
            if (rows < 1 || cols < 1) throw ConfigError("conv stack shrinks the board below 1x1");
            out.emplace_back(rows, cols);
        }
        return out;
    }

    void validate() const {
        if (board_height < 1 || board_width < 1) throw ConfigError("board dimensions must be >= 1");
        if (colors < 1) throw ConfigError("colors must be >= 1");
        if (layers.empty()) throw ConfigError("network needs at least one conv layer");
        for (const auto& l : layers) {
            if (l.kernel < 1 || l.filters < 1) throw ConfigError("kernel and filters must be >= 1");
            if (l.same_padding && l.kernel % 2 == 0) throw ConfigError("same padding needs an odd kernel");
        }
        spatial_sizes();
    }

    /// FNV-1a over the architecture fields (the seed is excluded).
    std::uint64_t digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto feed = [&](std::int64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= static_cast<std::uint8_t>(v >> (8 * i));
                h *= 0x100000001b3ULL;
            }
        };
        feed(board_height);
        feed(board_width);
        feed(colors);
        feed(static_cast<std::int64_t>(layers.size()));
        for (const auto& l : layers) {
            feed(l.kernel);
            feed(l.filters);
            feed(l.same_padding ? 1 : 0);
        }
        return h;
    }

    bool same_architecture(const ConvPolicyConfig& o) const {
        return board_height == o.board_height && board_width == o.board_width && colors == o.colors &&
               layers == o.layers;
    }
};

/// ELU with alpha = 1.
template <std::floating_point T>
inline T elu(T x) noexcept {
    return x >= T(0) ? x : std::expm1(x);
}

/**
 * Convolutional softmax policy with hand-written backpropagation.
 *
 * Parameters live in one flat vector, in layer order: for each conv layer the
 * weights [filters][in_channels][k][k] then biases [filters], then the linear
 * weights [outputs][features] and biases [outputs]. Features are flattened as
 * [channel][row][col].
 */
template <std::floating_point T>
class ConvPolicyNet final : public PolicyModel {
public:
    using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    explicit ConvPolicyNet(ConvPolicyConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        build_layout();
        params_.assign(total_, T(0));
        initialize(cfg_.seed);
    }

    const ConvPolicyConfig& config() const noexcept { return cfg_; }
    int output_size() const override { return cfg_.output_size(); }
    std::size_t parameter_count() const noexcept { return params_.size(); }
    std::span<T> parameters() noexcept { return params_; }
    std::span<const T> parameters() const noexcept { return params_; }

    /// Scaled-uniform fan-in init: conv weights U(+-sqrt(6/fan_in)), linear U(+-sqrt(3/fan_in)), zero biases.
    void initialize(std::uint64_t seed) {
        CounterRng rng(derive_key(seed, {0x1a17ULL}));
        for (std::size_t l = 0; l < conv_.size(); ++l) {
            const auto& c = conv_[l];
            const T bound = std::sqrt(T(6) / static_cast<T>(c.in_channels * c.kernel * c.kernel));
            for (std::size_t i = 0; i < c.weight_count(); ++i)
                params_[c.weight_offset + i] = static_cast<T>((2 * rng.uniform() - 1)) * bound;
            std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(c.bias_offset), c.filters, T(0));
        }
        const T bound = std::sqrt(T(3) / static_cast<T>(features_));
        for (std::size_t i = 0; i < static_cast<std::size_t>(outputs_) * features_; ++i)
            params_[linear_weight_offset_ + i] = static_cast<T>((2 * rng.uniform() - 1)) * bound;
        std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(linear_bias_offset_), outputs_, T(0));
    }

    /// [offset, size) of every weight and bias tensor inside parameters(), in layout order.
    std::vector<std::pair<std::size_t, std::size_t>> parameter_blocks() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& c : conv_) {
            out.emplace_back(c.weight_offset, c.weight_count());
            out.emplace_back(c.bias_offset, static_cast<std::size_t>(c.filters));
        }
        out.emplace_back(linear_weight_offset_, static_cast<std::size_t>(outputs_) * features_);
        out.emplace_back(linear_bias_offset_, static_cast<std::size_t>(outputs_));
        return out;
    }

    /// Zeroes the final linear layer, making the output exactly uniform.
    void zero_output_layer() {
        std::fill(params_.begin() + static_cast<std::ptrdiff_t>(linear_weight_offset_), params_.end(), T(0));
    }

    std::vector<float> evaluate(const Planes& input) const override {
        const Planes* one = &input;
        const Matrix probs = forward(std::span<const Planes>(one, 1), nullptr);
        std::vector<float> out(static_cast<std::size_t>(outputs_));
        for (int i = 0; i < outputs_; ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(probs(i, 0));
        return out;
    }

    std::vector<std::vector<float>> evaluate_batch(std::span<const Planes> inputs) const override {
        std::vector<std::vector<float>> out;
        out.reserve(inputs.size());
        constexpr std::size_t chunk = 256;
        for (std::size_t start = 0; start < inputs.size(); start += chunk) {
            const auto part = inputs.subspan(start, std::min(chunk, inputs.size() - start));
            const Matrix probs = forward(part, nullptr);
            for (Eigen::Index b = 0; b < probs.cols(); ++b) {
                std::vector<float> v(static_cast<std::size_t>(outputs_));
                for (int i = 0; i < outputs_; ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(probs(i, b));
                out.push_back(std::move(v));
            }
        }
        return out;
    }

    /// Probabilities in full precision, one column per input.
    Matrix probabilities(std::span<const Planes> inputs) const { return forward(inputs, nullptr); }

    /// Mean cross-entropy -1/B sum log p(target).
    double loss(std::span<const Planes> inputs, std::span<const int> targets) const {
        check_targets(inputs, targets);
        Cache cache;
        forward(inputs, &cache);
        return mean_nll(cache.logits, targets);
    }

    /// Mean cross-entropy and its gradient with respect to every parameter (grad sized like parameters()).
    double loss_and_gradients(std::span<const Planes> inputs, std::span<const int> targets, std::span<T> grad) const {
        check_targets(inputs, targets);
        if (grad.size() != params_.size()) throw ShapeError("gradient buffer size mismatch");
        Cache cache;
        const Matrix probs = forward(inputs, &cache);
        const double loss_value = mean_nll(cache.logits, targets);
        const auto batch = static_cast<Eigen::Index>(inputs.size());

        std::vector<T, Eigen::aligned_allocator<T>> work(params_.size(), T(0));
        Matrix dlogits = probs;
        for (Eigen::Index b = 0; b < batch; ++b) dlogits(targets[static_cast<std::size_t>(b)], b) -= T(1);
        dlogits /= static_cast<T>(batch);

        // Linear layer.
        Eigen::Map<RowMatrix> dW_lin(work.data() + linear_weight_offset_, outputs_, features_);
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db_lin(work.data() + linear_bias_offset_, outputs_);
        dW_lin.noalias() = dlogits * cache.flat.transpose();
        db_lin = dlogits.rowwise().sum();
        Eigen::Map<const RowMatrix> W_lin(params_.data() + linear_weight_offset_, outputs_, features_);
        const Matrix dflat = W_lin.transpose() * dlogits;

        // Unflatten into the last activation layout: [filters] x [batch * positions].
        const auto& last = conv_.back();
        const Eigen::Index positions = static_cast<Eigen::Index>(last.out_rows) * last.out_cols;
        Matrix dact(last.filters, batch * positions);
        for (Eigen::Index b = 0; b < batch; ++b)
            for (int f = 0; f < last.filters; ++f)
                for (Eigen::Index p = 0; p < positions; ++p) dact(f, b * positions + p) = dflat(f * positions + p, b);

        for (std::size_t li = conv_.size(); li-- > 0;) {
            const auto& c = conv_[li];
            const Matrix& pre = cache.pre[li];
            // ELU'(z) = 1 for z >= 0, exp(z) otherwise.
            Matrix dpre = dact.binaryExpr(pre, [](T g, T z) { return z >= T(0) ? g : g * std::exp(z); });
            Eigen::Map<RowMatrix> dW(work.data() + c.weight_offset, c.filters, c.in_channels * c.kernel * c.kernel);
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(work.data() + c.bias_offset, c.filters);
            dW.noalias() = dpre * cache.cols[li].transpose();
            db = dpre.rowwise().sum();
            if (li == 0) break;
            Eigen::Map<const RowMatrix> W(params_.data() + c.weight_offset, c.filters, c.in_channels * c.kernel * c.kernel);
            const Matrix dcols = W.transpose() * dpre;
            dact = col2im(dcols, c, batch);
        }
        std::copy(work.begin(), work.end(), grad.begin());
        return loss_value;
    }

    /// Same architecture and parameters in another precision.
    template <std::floating_point U>
    ConvPolicyNet<U> cast() const {
        ConvPolicyNet<U> other(cfg_);
        auto dst = other.parameters();
        for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
        return other;
    }

private:
    struct ConvGeometry {
        int in_channels, in_rows, in_cols;
        int kernel, pad, filters;
        int out_rows, out_cols;
        std::size_t weight_offset, bias_offset;

        std::size_t weight_count() const noexcept {
            return static_cast<std::size_t>(filters) * in_channels * kernel * kernel;
        }
    };

    struct Cache {
        std::vector<Matrix> cols;  // im2col input of each layer
        std::vector<Matrix> pre;   // pre-activation of each layer
        Matrix flat;               // features x batch
        Matrix logits;             // outputs x batch
    };

    void build_layout() {
        conv_.clear();
        std::size_t offset = 0;
        int ch = cfg_.input_channels(), rows = cfg_.input_rows(), cols = cfg_.input_cols();
        for (const auto& l : cfg_.layers) {
            ConvGeometry g{};
            g.in_channels = ch;
            g.in_rows = rows;
            g.in_cols = cols;
            g.kernel = l.kernel;
            g.pad = l.same_padding ? (l.kernel - 1) / 2 : 0;
            g.filters = l.filters;
            g.out_rows = rows + 2 * g.pad - l.kernel + 1;
            g.out_cols = cols + 2 * g.pad - l.kernel + 1;
            g.weight_offset = offset;
            offset += g.weight_count();
            g.bias_offset = offset;
            offset += static_cast<std::size_t>(g.filters);
            conv_.push_back(g);
            ch = g.filters;
            rows = g.out_rows;
            cols = g.out_cols;
        }
        features_ = ch * rows * cols;
        outputs_ = cfg_.output_size();
        linear_weight_offset_ = offset;
        offset += static_cast<std::size_t>(outputs_) * features_;
        linear_bias_offset_ = offset;
        offset += static_cast<std::size_t>(outputs_);
        total_ = offset;
    }

    void check_input(const Planes& x) const {
        if (x.channels != cfg_.input_channels() || x.rows != cfg_.input_rows() || x.cols != cfg_.input_cols())
            throw ShapeError("input planes " + std::to_string(x.rows) + "x" + std::to_string(x.cols) + "x" +
                             std::to_string(x.channels) + " do not match network input " +
                             std::to_string(cfg_.input_rows()) + "x" + std::to_string(cfg_.input_cols()) + "x" +
                             std::to_string(cfg_.input_channels()));
    }

    void check_targets(std::span<const Planes> inputs, std::span<const int> targets) const {
        if (inputs.empty()) throw ShapeError("empty batch");
        if (inputs.size() != targets.size()) throw ShapeError("inputs and targets differ in length");
        for (int t : targets)
            if (t < 0 || t >= outputs_) throw ShapeError("target index out of range");
    }

    /// Input planes as [channels] x [batch * rows * cols].
    Matrix stack_inputs(std::span<const Planes> inputs) const {
        const Eigen::Index hw = static_cast<Eigen::Index>(cfg_.input_rows()) * cfg_.input_cols();
        Matrix x(cfg_.input_channels(), static_cast<Eigen::Index>(inputs.size()) * hw);
        for (std::size_t b = 0; b < inputs.size(); ++b) {
            check_input(inputs[b]);
            for (int c = 0; c < cfg_.input_channels(); ++c)
                for (Eigen::Index p = 0; p < hw; ++p)
                    x(c, static_cast<Eigen::Index>(b) * hw + p) =
                        static_cast<T>(inputs[b].data[static_cast<std::size_t>(c * hw + p)]);
        }
        return x;
    }

    static Matrix im2col(const Matrix& x, const ConvGeometry& g, Eigen::Index batch) {
        const Eigen::Index in_hw = static_cast<Eigen::Index>(g.in_rows) * g.in_cols;
        const Eigen::Index out_hw = static_cast<Eigen::Index>(g.out_rows) * g.out_cols;
        Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(g.in_channels) * g.kernel * g.kernel, batch * out_hw);
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (int c = 0; c < g.in_channels; ++c) {
                for (int ky = 0; ky < g.kernel; ++ky) {
                    for (int kx = 0; kx < g.kernel; ++kx) {
                        const Eigen::Index row = (static_cast<Eigen::Index>(c) * g.kernel + ky) * g.kernel + kx;
                        for (int oy = 0; oy < g.out_rows; ++oy) {
                            const int iy = oy + ky - g.pad;
                            if (iy < 0 || iy >= g.in_rows) continue;
                            for (int ox = 0; ox < g.out_cols; ++ox) {
                                const int ix = ox + kx - g.pad;
                                if (ix < 0 || ix >= g.in_cols) continue;
                                cols(row, b * out_hw + oy * g.out_cols + ox) =
                                    x(c, b * in_hw + static_cast<Eigen::Index>(iy) * g.in_cols + ix);
                            }
                        }
                    }
                }
            }
        }
        return cols;
    }

    static Matrix col2im(const Matrix& dcols, const ConvGeometry& g, Eigen::Index batch) {
        const Eigen::Index in_hw = static_cast<Eigen::Index>(g.in_rows) * g.in_cols;
        const Eigen::Index out_hw = static_cast<Eigen::Index>(g.out_rows) * g.out_cols;
        Matrix dx = Matrix::Zero(g.in_channels, batch * in_hw);
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (int c = 0; c < g.in_channels; ++c) {
                for (int ky = 0; ky < g.kernel; ++ky) {
                    for (int kx = 0; kx < g.kernel; ++kx) {
                        const Eigen::Index row = (static_cast<Eigen::Index>(c) * g.kernel + ky) * g.kernel + kx;
                        for (int oy = 0; oy < g.out_rows; ++oy) {
                            const int iy = oy + ky - g.pad;
                            if (iy < 0 || iy >= g.in_rows) continue;
                            for (int ox = 0; ox < g.out_cols; ++ox) {
                                const int ix = ox + kx - g.pad;
                                if (ix < 0 || ix >= g.in_cols) continue;
                                dx(c, b * in_hw + static_cast<Eigen::Index>(iy) * g.in_cols + ix) +=
                                    dcols(row, b * out_hw + oy * g.out_cols + ox);
                            }
                        }
                    }
                }
            }
        }
        return dx;
    }

    Matrix forward(std::span<const Planes> inputs, Cache* cache) const {
        const auto batch = static_cast<Eigen::Index>(inputs.size());
        Matrix act = stack_inputs(inputs);
        if (cache) {
            cache->cols.clear();
            cache->pre.clear();
        }
        for (const auto& c : conv_) {
            Matrix cols = im2col(act, c, batch);
            Eigen::Map<const RowMatrix> W(params_.data() + c.weight_offset, c.filters, c.in_channels * c.kernel * c.kernel);
            Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(params_.data() + c.bias_offset, c.filters);
            Matrix pre = W * cols;
            pre.colwise() += bias;
            act = pre.unaryExpr([](T z) { return elu(z); });
            if (cache) {
                cache->cols.push_back(std::move(cols));
                cache->pre.push_back(std::move(pre));
            }
        }
        const auto& last = conv_.back();
        const Eigen::Index positions = static_cast<Eigen::Index>(last.out_rows) * last.out_cols;
        Matrix flat(features_, batch);
        for (Eigen::Index b = 0; b < batch; ++b)
            for (int f = 0; f < last.filters; ++f)
                for (Eigen::Index p = 0; p < positions; ++p) flat(f * positions + p, b) = act(f, b * positions + p);
        Eigen::Map<const RowMatrix> W_lin(params_.data() + linear_weight_offset_, outputs_, features_);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b_lin(params_.data() + linear_bias_offset_, outputs_);
        Matrix logits = W_lin * flat;
        logits.colwise() += b_lin;
        Matrix probs(outputs_, batch);
        for (Eigen::Index b = 0; b < batch; ++b) {
            const T mx = logits.col(b).maxCoeff();
            probs.col(b) = (logits.col(b).array() - mx).exp().matrix();
            probs.col(b) /= probs.col(b).sum();
        }
        if (cache) {
            cache->flat = std::move(flat);
            cache->logits = std::move(logits);
        }
        return probs;
    }

    static double mean_nll(const Matrix& logits, std::span<const int> targets) {
        double total = 0.0;
        for (Eigen::Index b = 0; b < logits.cols(); ++b) {
            const double mx = static_cast<double>(logits.col(b).maxCoeff());
            double s = 0.0;
            for (Eigen::Index i = 0; i < logits.rows(); ++i) s += std::exp(static_cast<double>(logits(i, b)) - mx);
            total += mx + std::log(s) - static_cast<double>(logits(targets[static_cast<std::size_t>(b)], b));
        }
        return total / static_cast<double>(logits.cols());
    }

    ConvPolicyConfig cfg_;
    std::vector<ConvGeometry> conv_;
    int features_ = 0;
    int outputs_ = 0;
    std::size_t linear_weight_offset_ = 0;
    std::size_t linear_bias_offset_ = 0;
    std::size_t total_ = 0;
    // Aligned storage: Eigen picks vectorization paths by pointer alignment, which would make
    // results depend on where the allocator placed the buffer.
    std::vector<T, Eigen::aligned_allocator<T>> params_;
};

}  // namespace pgmcts::policy
