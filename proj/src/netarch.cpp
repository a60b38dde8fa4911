#include "lanepath/netarch.hpp"

#include <stdexcept>

namespace lanepath {

namespace {

// Incremental builder for the linear-with-skips encoder/decoder graphs.
class GraphBuilder {
 public:
  GraphBuilder(std::string name, int input_channels) {
    g_.name = std::move(name);
    g_.input_channels = input_channels;
    ch_ = input_channels;
  }

  int conv(const std::string& name, int k, int out_ch) {
    add({LayerKind::conv, name, k, ch_, out_ch});
    ch_ = out_ch;
    return last();
  }
  // Depthwise + pointwise factorization of a k x k conv.
  void ds_conv(const std::string& name, int k, int out_ch) {
    add({LayerKind::depthwise, name + "_dw", k, ch_, ch_});
    add({LayerKind::pointwise, name + "_pw", 1, ch_, out_ch});
    ch_ = out_ch;
  }
  void upconv(const std::string& name, int out_ch) {
    add({LayerKind::upconv, name, 2, ch_, out_ch});
    ch_ = out_ch;
  }
  void bn() { add({LayerKind::batchnorm, g_.layers.back().name + "_bn", 0, ch_, ch_}); }
  void pool(const std::string& name) { add({LayerKind::maxpool, name, 2, ch_, ch_}); }
  void dropout(const std::string& name, double rate) {
    LayerSpec l{LayerKind::dropout, name, 0, ch_, ch_};
    l.rate = rate;
    add(l);
  }
  void concat(const std::string& name, int source_layer) {
    const int skip_ch = g_.layers[source_layer].out_ch;
    LayerSpec l{LayerKind::concat, name, 0, ch_, ch_ + skip_ch};
    l.concat_source = source_layer;
    add(l);
    ch_ += skip_ch;
  }

  int last() const { return static_cast<int>(g_.layers.size()) - 1; }
  NetGraph finish() {
    g_.output_channels = ch_;
    return std::move(g_);
  }

 private:
  void add(LayerSpec l) { g_.layers.push_back(std::move(l)); }
  NetGraph g_;
  int ch_ = 0;
};

constexpr int kLevelCh[4] = {64, 128, 256, 512};
constexpr int kBottleneckCh = 1024;

}  // namespace

NetGraph unet_graph() {
  GraphBuilder b("unet", 1);
  int skips[4];
  for (int lv = 0; lv < 4; ++lv) {
    const std::string tag = "enc" + std::to_string(lv + 1);
    b.conv(tag + "_conv1", 3, kLevelCh[lv]);
    b.bn();
    b.conv(tag + "_conv2", 3, kLevelCh[lv]);
    b.bn();
    skips[lv] = b.last();
    b.pool(tag + "_pool");
  }
  b.conv("bottleneck_conv1", 3, kBottleneckCh);
  b.bn();
  b.conv("bottleneck_conv2", 3, kBottleneckCh);
  b.bn();
  for (int lv = 3; lv >= 0; --lv) {
    const std::string tag = "dec" + std::to_string(lv + 1);
    b.upconv(tag + "_up", kLevelCh[lv]);
    b.bn();
    b.concat(tag + "_concat", skips[lv]);
    b.conv(tag + "_conv1", 3, kLevelCh[lv]);
    b.bn();
    b.conv(tag + "_conv2", 3, kLevelCh[lv]);
    b.bn();
  }
  b.conv("out_conv", 1, 2);
  return b.finish();
}

NetGraph dsunet_graph() {
  GraphBuilder b("dsunet", 3);
  int skips[4];
  for (int lv = 0; lv < 4; ++lv) {
    const std::string tag = "enc" + std::to_string(lv + 1);
    if (lv == 0) {
      // The input conv stays standard: at 3 input channels the depthwise
      // factorization saves almost nothing.
      b.conv(tag + "_conv1", 3, kLevelCh[lv]);
      b.bn();
    } else {
      b.ds_conv(tag + "_conv1", 3, kLevelCh[lv]);
      b.bn();
    }
    b.ds_conv(tag + "_conv2", 3, kLevelCh[lv]);
    b.bn();
    skips[lv] = b.last();
    if (lv == 3) b.dropout(tag + "_drop", 0.5);
    b.pool(tag + "_pool");
  }
  b.ds_conv("bottleneck_conv1", 3, kBottleneckCh);
  b.bn();
  b.ds_conv("bottleneck_conv2", 3, kBottleneckCh);
  b.bn();
  b.dropout("bottleneck_drop", 0.5);
  for (int lv = 3; lv >= 0; --lv) {
    const std::string tag = "dec" + std::to_string(lv + 1);
    b.upconv(tag + "_up", kLevelCh[lv]);
    b.bn();
    b.concat(tag + "_concat", skips[lv]);
    b.ds_conv(tag + "_conv1", 3, kLevelCh[lv]);
    b.bn();
    b.ds_conv(tag + "_conv2", 3, kLevelCh[lv]);
    b.bn();
    if (lv == 3) b.dropout(tag + "_drop", 0.5);
  }
  b.conv("out_conv", 1, 1);
  return b.finish();
}

int conv_layer_count(const NetGraph& g) {
  int n = 0;
  for (const auto& l : g.layers) {
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::depthwise:
      case LayerKind::pointwise:
      case LayerKind::upconv:
        ++n;
        break;
      default:
        break;
    }
  }
  return n;
}

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::depthwise: return "depthwise";
    case LayerKind::pointwise: return "pointwise";
    case LayerKind::upconv: return "upconv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::dropout: return "dropout";
    case LayerKind::concat: return "concat";
  }
  return "?";
}

namespace {

long long weight_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv:
      return static_cast<long long>(l.k) * l.k * l.in_ch * l.out_ch;
    case LayerKind::depthwise:
      return static_cast<long long>(l.k) * l.k * l.in_ch;
    case LayerKind::pointwise:
      return static_cast<long long>(l.in_ch) * l.out_ch;
    case LayerKind::upconv:
      return 4LL * l.in_ch * l.out_ch;
    default:
      return 0;
  }
}

long long param_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::conv:
    case LayerKind::depthwise:
    case LayerKind::pointwise:
    case LayerKind::upconv:
      return weight_count(l) + (l.bias ? l.out_ch : 0);
    case LayerKind::batchnorm:
      return 2LL * l.out_ch;  // learnable scale + shift; running stats excluded
    default:
      return 0;
  }
}

// Walks the graph validating channel chaining and the spatial scale at
// every layer. The callback receives (layer, out_w, out_h, in_w, in_h).
template <typename Fn>
void walk(const NetGraph& g, int input_w, int input_h, Fn&& fn) {
  int ch = g.input_channels;
  int w = input_w, h = input_h;
  std::vector<std::pair<int, std::pair<int, int>>> recorded(g.layers.size());
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    const int in_w = w, in_h = h;
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::depthwise:
      case LayerKind::pointwise:
        if (l.in_ch != ch) throw std::runtime_error(g.name + ": channel mismatch at " + l.name);
        if (l.kind == LayerKind::depthwise && l.out_ch != l.in_ch)
          throw std::runtime_error(g.name + ": depthwise must preserve channels at " + l.name);
        ch = l.out_ch;
        break;
      case LayerKind::upconv:
        if (l.in_ch != ch) throw std::runtime_error(g.name + ": channel mismatch at " + l.name);
        ch = l.out_ch;
        w *= 2;
        h *= 2;
        break;
      case LayerKind::maxpool:
        if (w % 2 || h % 2)
          throw std::runtime_error(g.name + ": odd spatial dims at " + l.name);
        w /= 2;
        h /= 2;
        break;
      case LayerKind::batchnorm:
        if (l.out_ch != ch) throw std::runtime_error(g.name + ": batchnorm channel mismatch at " + l.name);
        break;
      case LayerKind::dropout:
        break;
      case LayerKind::concat: {
        if (l.concat_source < 0 || l.concat_source >= static_cast<int>(i))
          throw std::runtime_error(g.name + ": bad concat source at " + l.name);
        const auto& src = recorded[l.concat_source];
        if (src.second.first != w || src.second.second != h)
          throw std::runtime_error(g.name + ": concat spatial mismatch at " + l.name);
        if (l.out_ch != ch + src.first)
          throw std::runtime_error(g.name + ": concat channel sum wrong at " + l.name);
        ch = l.out_ch;
        break;
      }
    }
    recorded[i] = {ch, {w, h}};
    fn(l, w, h, in_w, in_h);
  }
}

}  // namespace

CostReport count_params(const NetGraph& g) {
  CostReport report;
  // Spatial dims are irrelevant for parameters; 16x16 satisfies the walk.
  walk(g, 16, 16, [&](const LayerSpec& l, int, int, int, int) {
    LayerCost c;
    c.name = l.name;
    c.kind = l.kind;
    c.out_ch = l.out_ch;
    c.params = param_count(l);
    report.params += c.params;
    report.per_layer.push_back(std::move(c));
  });
  return report;
}

CostReport count_macs(const NetGraph& g, int input_w, int input_h) {
  if (input_w % 16 || input_h % 16 || input_w <= 0 || input_h <= 0)
    throw std::invalid_argument("count_macs: input dims must be positive multiples of 16");
  CostReport report;
  walk(g, input_w, input_h, [&](const LayerSpec& l, int w, int h, int in_w, int in_h) {
    LayerCost c;
    c.name = l.name;
    c.kind = l.kind;
    c.out_ch = l.out_ch;
    c.out_w = w;
    c.out_h = h;
    c.params = param_count(l);
    // The transposed conv applies its 2x2 kernel once per input location;
    // everything else applies its kernel once per output location.
    const long long positions = l.kind == LayerKind::upconv
                                    ? static_cast<long long>(in_w) * in_h
                                    : static_cast<long long>(w) * h;
    c.macs = weight_count(l) * positions;
    report.params += c.params;
    report.macs += c.macs;
    report.per_layer.push_back(std::move(c));
  });
  return report;
}

}  // namespace lanepath
