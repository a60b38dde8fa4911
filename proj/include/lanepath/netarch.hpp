// Declarative UNet / DSUNet layer graphs with parameter and MAC counting.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lanepath {

enum class LayerKind {
  conv,       // k x k standard convolution
  depthwise,  // k x k per-channel convolution
  pointwise,  // 1 x 1 convolution
  upconv,     // 2 x 2 transposed convolution, stride 2
  maxpool,    // 2 x 2, stride 2
  batchnorm,
  dropout,
  concat,     // skip connection, channels append
};

struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  std::string name;
  int k = 0;
  int in_ch = 0;
  int out_ch = 0;
  bool bias = true;
  double rate = 0.0;        // dropout
  int concat_source = -1;   // layer index whose output is appended
};

struct NetGraph {
  std::string name;
  int input_channels = 0;
  int output_channels = 0;
  std::vector<LayerSpec> layers;
};

// Classic UNet: encoder 64-128-256-512, bottleneck 1024, mirrored decoder
// with skip concats, final 1x1 conv; 1 input channel, 2 output channels;
// batchnorm after every conv-type layer except the output conv. 23
// conv-type layers (18 3x3 + 4 upconv + 1 1x1).
NetGraph unet_graph();

// Same topology with 17 of the 18 3x3 convs replaced by depthwise +
// pointwise pairs (the first input conv stays standard), 3 input channels,
// 1 output channel, 3 dropouts at the deepest levels. 40 conv-type layers.
NetGraph dsunet_graph();

// conv + depthwise + pointwise + upconv census.
int conv_layer_count(const NetGraph& g);

struct LayerCost {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int out_ch = 0;
  int out_w = 0;
  int out_h = 0;
  long long params = 0;
  long long macs = 0;
};

struct CostReport {
  long long params = 0;
  long long macs = 0;
  std::vector<LayerCost> per_layer;
};

// Learnable parameters: conv k*k*in*out (+out bias), depthwise k*k*ch (+ch),
// pointwise in*out (+out), upconv 2*2*in*out (+out), batchnorm 2*ch;
// pool/dropout/concat are free. Validates channel chaining and throws
// std::runtime_error on an inconsistent graph.
CostReport count_params(const NetGraph& g);

// MACs per layer: weight count (no bias) times the number of kernel
// applications — output positions for conv/depthwise/pointwise, input
// positions for the stride-2 transposed conv (its kernel is applied once
// per input location). Pool/batchnorm/dropout/concat cost 0. Input dims
// must be divisible by 16 (4 pooling levels); throws std::invalid_argument
// otherwise.
CostReport count_macs(const NetGraph& g, int input_w, int input_h);

const char* layer_kind_name(LayerKind k);

}  // namespace lanepath
