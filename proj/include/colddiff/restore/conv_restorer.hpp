#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddiff/core/rng.hpp"
#include "colddiff/restore/tensor.hpp"

namespace colddiff {

/// Network shape: input channels, encoder widths (one stride-2 stage each) and
/// time-embedding width. No stages gives a single linear 3x3 layer.
struct Architecture {
  int channels{1};
  std::vector<int> stages{32, 64, 128};
  int embed_dim{32};

  bool operator==(const Architecture&) const = default;

  /// e.g. "c1-s32.64.128-e32"
  std::string descriptor() const {
    std::ostringstream os;
    os << 'c' << channels << "-s";
    for (std::size_t i = 0; i < stages.size(); ++i) os << (i ? "." : "") << stages[i];
    os << "-e" << embed_dim;
    return os.str();
  }

  static Architecture parse(const std::string& d) {
    Architecture a;
    a.stages.clear();
    const auto s_pos = d.find("-s");
    const auto e_pos = d.rfind("-e");
    if (d.empty() || d[0] != 'c' || s_pos == std::string::npos || e_pos == std::string::npos || e_pos < s_pos) {
      throw std::invalid_argument("bad architecture descriptor '" + d + "'");
    }
    try {
      a.channels = std::stoi(d.substr(1, s_pos - 1));
      const std::string st = d.substr(s_pos + 2, e_pos - s_pos - 2);
      std::size_t start = 0;
      while (start < st.size()) {
        auto dot = st.find('.', start);
        if (dot == std::string::npos) dot = st.size();
        a.stages.push_back(std::stoi(st.substr(start, dot - start)));
        start = dot + 1;
      }
      a.embed_dim = std::stoi(d.substr(e_pos + 2));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad architecture descriptor '" + d + "'");
    }
    a.validate();
    return a;
  }

  void validate() const {
    if (channels < 1) throw std::invalid_argument("Architecture: channels must be >= 1");
    if (embed_dim < 2 || embed_dim % 2) throw std::invalid_argument("Architecture: embed_dim must be even and >= 2");
    for (int c : stages) {
      if (c < 1) throw std::invalid_argument("Architecture: stage widths must be >= 1");
    }
  }
};

/// Time-conditioned encoder-decoder with skip connections and a residual output.
/// Encoder stage i is a stride-2 conv to stages[i] channels; decoder stage j upsamples,
/// concatenates the matching encoder input and convolves back to its width (stages[0]
/// at full resolution); a linear 3x3 head maps to the image channels.
/// R(x, t) = x + net(2x - 1, t). Parameters live in one flat vector.
template <class S>
class ConvRestorer {
 public:
  template <class T>
  using Tensor = nn::Tensor<T>;
  template <class T>
  using MatrixR = nn::MatrixR<T>;
  template <class T>
  using MapR = nn::MapR<T>;
  template <class T>
  using ConstMapR = nn::ConstMapR<T>;

  struct Layer {
    int cin{0};
    int cout{0};
    int stride{1};
    bool activate{true};
    bool timed{true};
    std::size_t w{0};  // cout x (cin * 9)
    std::size_t b{0};  // cout
    std::size_t e{0};  // cout x embed_dim
  };

  struct LayerCache {
    MatrixR<S> col;
    mutable MatrixR<S> dcol;  // backward scratch
    std::vector<S> z;
    int in_c{0}, in_h{0}, in_w{0};
    int out_h{0}, out_w{0};
  };

  struct Cache {
    int batch{0};
    MatrixR<S> emb;
    std::vector<LayerCache> layers;
    std::vector<std::pair<int, int>> up_source;  // spatial size of each upsampled tensor
  };

  explicit ConvRestorer(Architecture arch) : arch_{std::move(arch)} { build(); }

  ConvRestorer(Architecture arch, RngStream rng) : ConvRestorer(std::move(arch)) { initialize(rng); }

  ConvRestorer(Architecture arch, std::vector<S> params) : ConvRestorer(std::move(arch)) {
    if (params.size() != params_.size()) {
      throw std::invalid_argument("ConvRestorer: expected " + std::to_string(params_.size()) + " parameters, got " +
                                  std::to_string(params.size()));
    }
    params_ = std::move(params);
  }

  /// Fan-in scaled uniform weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)); zero biases.
  void initialize(RngStream& rng) {
    std::fill(params_.begin(), params_.end(), S(0));
    for (const Layer& l : layers_) {
      const double bw = 1.0 / std::sqrt(static_cast<double>(l.cin) * 9.0);
      for (std::size_t i = 0; i < static_cast<std::size_t>(l.cout) * l.cin * 9; ++i) {
        params_[l.w + i] = static_cast<S>(rng.uniform(-bw, bw));
      }
      if (l.timed) {
        const double be = 1.0 / std::sqrt(static_cast<double>(arch_.embed_dim));
        for (std::size_t i = 0; i < static_cast<std::size_t>(l.cout) * arch_.embed_dim; ++i) {
          params_[l.e + i] = static_cast<S>(rng.uniform(-be, be));
        }
      }
    }
  }

  const Architecture& architecture() const { return arch_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<S>& params() { return params_; }
  const std::vector<S>& params() const { return params_; }
  const std::vector<Layer>& layers() const { return layers_; }

  template <class T>
  ConvRestorer<T> cast() const {
    std::vector<T> p(params_.begin(), params_.end());
    return ConvRestorer<T>(arch_, std::move(p));
  }

  Tensor<S> forward(const Tensor<S>& x, std::span<const int> steps, Cache* cache = nullptr) const {
    if (x.c != arch_.channels) {
      throw std::invalid_argument("ConvRestorer: input has " + std::to_string(x.c) + " channels, network expects " +
                                  std::to_string(arch_.channels));
    }
    if (static_cast<int>(steps.size()) != x.n) throw std::invalid_argument("ConvRestorer: one step per batch item required");
    Cache local;
    Cache& c = cache ? *cache : local;
    c.batch = x.n;
    c.emb = nn::time_embedding<S>(steps, arch_.embed_dim);
    c.layers.resize(layers_.size());
    c.up_source.clear();

    const int L = static_cast<int>(arch_.stages.size());
    Tensor<S> xin = x;
    for (S& v : xin.data) v = S(2) * v - S(1);
    Tensor<S> out;
    if (L == 0) {
      out = apply(head_index(), xin, c);
    } else {
      std::vector<Tensor<S>> skip;
      skip.reserve(static_cast<std::size_t>(L) + 1);
      skip.push_back(std::move(xin));
      for (int i = 0; i < L; ++i) skip.push_back(apply(static_cast<std::size_t>(i), skip.back(), c));
      Tensor<S> h = std::move(skip.back());
      skip.pop_back();
      for (int j = L - 1; j >= 0; --j) {
        const Tensor<S>& s = skip[static_cast<std::size_t>(j)];
        c.up_source.emplace_back(h.h, h.w);
        Tensor<S> in = nn::concat_channels(nn::upsample2(h, s.h, s.w), s);
        h = apply(up_index(j), in, c);
      }
      out = apply(head_index(), h, c);
    }
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += x.data[i];
    if (!cache) c = Cache{};
    return out;
  }

  /// Gradient of sum(grad_out * R(x, t)) with respect to the parameters.
  std::vector<S> backward(const Cache& c, const Tensor<S>& grad_out) const {
    std::vector<S> grad(params_.size(), S(0));
    backward_into(c, grad_out, grad);
    return grad;
  }

  /// Adds the parameter gradient into `grad`.
  void backward_into(const Cache& c, const Tensor<S>& grad_out, std::vector<S>& grad) const {
    if (grad.size() != params_.size()) throw std::invalid_argument("ConvRestorer: gradient buffer size mismatch");
    const int L = static_cast<int>(arch_.stages.size());
    if (L == 0) {
      backprop(head_index(), c, grad_out, grad, false);
      return;
    }
    Tensor<S> dh = backprop(head_index(), c, grad_out, grad, true);
    std::vector<Tensor<S>> skip_grad(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
      const std::size_t li = up_index(j);
      Tensor<S> din = backprop(li, c, dh, grad, true);
      const int cu = arch_.stages[static_cast<std::size_t>(j)];
      Tensor<S> du(cu, din.n, din.h, din.w);
      std::copy(din.data.begin(), din.data.begin() + static_cast<std::ptrdiff_t>(du.data.size()), du.data.begin());
      if (j > 0) {
        Tensor<S> ds(din.c - cu, din.n, din.h, din.w);
        std::copy(din.data.begin() + static_cast<std::ptrdiff_t>(du.data.size()), din.data.end(), ds.data.begin());
        skip_grad[static_cast<std::size_t>(j)] = std::move(ds);
      }
      const auto [sh, sw] = c.up_source[static_cast<std::size_t>(L - 1 - j)];
      dh = nn::upsample2_backward(du, sh, sw);
    }
    for (int i = L - 1; i >= 0; --i) {
      Tensor<S> din = backprop(static_cast<std::size_t>(i), c, dh, grad, i > 0);
      if (i > 0) {
        Tensor<S>& sg = skip_grad[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < din.data.size(); ++k) din.data[k] += sg.data[k];
        dh = std::move(din);
      }
    }
  }

 private:
  std::size_t head_index() const { return layers_.size() - 1; }

  std::size_t up_index(int j) const {
    return static_cast<std::size_t>(arch_.stages.size()) + static_cast<std::size_t>(arch_.stages.size() - 1 - j);
  }

  void build() {
    arch_.validate();
    std::size_t offset = 0;
    auto add = [&](int cin, int cout, int stride, bool act, bool timed) {
      Layer l{cin, cout, stride, act, timed};
      l.w = offset;
      offset += static_cast<std::size_t>(cout) * cin * 9;
      l.b = offset;
      offset += static_cast<std::size_t>(cout);
      if (timed) {
        l.e = offset;
        offset += static_cast<std::size_t>(cout) * arch_.embed_dim;
      }
      layers_.push_back(l);
    };
    const int L = static_cast<int>(arch_.stages.size());
    const int C = arch_.channels;
    for (int i = 0; i < L; ++i) add(i == 0 ? C : arch_.stages[i - 1], arch_.stages[i], 2, true, true);
    for (int j = L - 1; j >= 0; --j) {
      const int skip = j == 0 ? C : arch_.stages[j - 1];
      add(arch_.stages[j] + skip, j == 0 ? arch_.stages[0] : skip, 1, true, true);
    }
    add(L == 0 ? C : arch_.stages[0], C, 1, false, false);
    params_.assign(offset, S(0));
  }

  Tensor<S> apply(std::size_t li, const Tensor<S>& in, Cache& c) const {
    const Layer& l = layers_[li];
    LayerCache& lc = c.layers[li];
    lc.in_c = in.c;
    lc.in_h = in.h;
    lc.in_w = in.w;
    lc.out_h = nn::conv_out_size(in.h, l.stride);
    lc.out_w = nn::conv_out_size(in.w, l.stride);
    nn::im2col3(in, l.stride, lc.col);
    Tensor<S> out(l.cout, in.n, lc.out_h, lc.out_w);
    auto Z = out.matrix();
    ConstMapR<S> W(params_.data() + l.w, l.cout, static_cast<Eigen::Index>(l.cin) * 9);
    const std::size_t hw = out.image_plane();
    // one product per image, so an output never depends on its batch neighbours
    const auto ehw = static_cast<Eigen::Index>(hw);
    for (int b = 0; b < out.n; ++b) Z.middleCols(b * ehw, ehw).noalias() = W * lc.col.middleCols(b * ehw, ehw);
    MatrixR<S> tb;
    if (l.timed) {
      ConstMapR<S> E(params_.data() + l.e, l.cout, arch_.embed_dim);
      tb.resize(l.cout, out.n);
      for (int b = 0; b < out.n; ++b) tb.col(b).noalias() = E * c.emb.col(b);
    }
    for (int ch = 0; ch < l.cout; ++ch) {
      S* row = out.row(ch);
      const S bias = params_[l.b + static_cast<std::size_t>(ch)];
      for (int b = 0; b < out.n; ++b) {
        const S add = bias + (l.timed ? tb(ch, b) : S(0));
        S* p = row + static_cast<std::size_t>(b) * hw;
        for (std::size_t k = 0; k < hw; ++k) p[k] += add;
      }
    }
    if (l.activate) {
      lc.z = out.data;
      nn::silu_inplace(out.data);
    }
    return out;
  }

  Tensor<S> backprop(std::size_t li, const Cache& c, const Tensor<S>& dout, std::vector<S>& grad, bool need_input) const {
    const Layer& l = layers_[li];
    const LayerCache& lc = c.layers[li];
    Tensor<S> dz = dout;
    if (l.activate) {
      for (std::size_t k = 0; k < dz.data.size(); ++k) dz.data[k] *= nn::silu_grad(lc.z[k]);
    }
    auto D = dz.matrix();
    MapR<S> dW(grad.data() + l.w, l.cout, static_cast<Eigen::Index>(l.cin) * 9);
    dW.noalias() += D * lc.col.transpose();
    const std::size_t hw = dz.image_plane();
    MatrixR<S> g(l.cout, dz.n);
    for (int ch = 0; ch < l.cout; ++ch) {
      const S* row = dz.row(ch);
      for (int b = 0; b < dz.n; ++b) {
        S s(0);
        const S* p = row + static_cast<std::size_t>(b) * hw;
        for (std::size_t k = 0; k < hw; ++k) s += p[k];
        g(ch, b) = s;
      }
    }
    for (int ch = 0; ch < l.cout; ++ch) grad[l.b + static_cast<std::size_t>(ch)] += g.row(ch).sum();
    if (l.timed) {
      MapR<S> dE(grad.data() + l.e, l.cout, arch_.embed_dim);
      dE.noalias() += g * c.emb.transpose();
    }
    if (!need_input) return {};
    ConstMapR<S> W(params_.data() + l.w, l.cout, static_cast<Eigen::Index>(l.cin) * 9);
    lc.dcol.resize(static_cast<Eigen::Index>(l.cin) * 9, D.cols());
    lc.dcol.noalias() = W.transpose() * D;
    return nn::col2im3(lc.dcol, lc.in_c, c.batch, lc.in_h, lc.in_w, l.stride);
  }

  Architecture arch_;
  std::vector<Layer> layers_;
  std::vector<S> params_;
};

}  // namespace colddiff
