#include "invlab/train/backbone.hpp"

#include <stdexcept>

namespace invlab::train {

namespace F = torch::nn::functional;
namespace nn = torch::nn;

namespace {

class SimpleCnn final : public ClassifierNet {
 public:
  SimpleCnn(const ImageShape& shape, int width, int num_classes) {
    int c = shape.channels;
    int h = shape.height;
    int w = shape.width;
    for (int b = 0; b < 4; ++b) {
      const int out = width << b;
      features_->push_back(nn::Conv2d(nn::Conv2dOptions(c, out, 3).padding(1).bias(false)));
      features_->push_back(nn::BatchNorm2d(out));
      features_->push_back(nn::ReLU());
      features_->push_back(nn::MaxPool2d(nn::MaxPool2dOptions(2).stride(2)));
      c = out;
      h /= 2;
      w /= 2;
    }
    if (h < 1 || w < 1) throw std::invalid_argument("simple_cnn needs inputs of at least 16x16");
    register_module("features", features_);
    head_ = register_module("head", nn::Linear(c * h * w, num_classes));
  }

  torch::Tensor forward(torch::Tensor x) override {
    return head_->forward(features_->forward(x).flatten(1));
  }

 private:
  nn::Sequential features_;
  nn::Linear head_{nullptr};
};

class BasicBlockImpl : public nn::Module {
 public:
  BasicBlockImpl(int in, int out, int stride)
      : conv1_(nn::Conv2dOptions(in, out, 3).stride(stride).padding(1).bias(false)),
        bn1_(out),
        conv2_(nn::Conv2dOptions(out, out, 3).padding(1).bias(false)),
        bn2_(out),
        stride_(stride),
        pad_(out - in) {
    register_module("conv1", conv1_);
    register_module("bn1", bn1_);
    register_module("conv2", conv2_);
    register_module("bn2", bn2_);
  }

  torch::Tensor forward(const torch::Tensor& x) {
    torch::Tensor out = torch::relu(bn1_(conv1_(x)));
    out = bn2_(conv2_(out));
    torch::Tensor shortcut = x;
    if (stride_ != 1 || pad_ != 0) {
      // option A: subsample and zero-pad the channels
      using torch::indexing::Slice;
      shortcut = x.index({Slice(), Slice(), Slice(torch::indexing::None, torch::indexing::None, stride_),
                          Slice(torch::indexing::None, torch::indexing::None, stride_)});
      shortcut = F::pad(shortcut, F::PadFuncOptions({0, 0, 0, 0, pad_ / 2, pad_ - pad_ / 2}));
    }
    return torch::relu(out + shortcut);
  }

 private:
  nn::Conv2d conv1_;
  nn::BatchNorm2d bn1_;
  nn::Conv2d conv2_;
  nn::BatchNorm2d bn2_;
  int stride_;
  int pad_;
};
TORCH_MODULE(BasicBlock);

class CifarResNet final : public ClassifierNet {
 public:
  CifarResNet(int in_channels, int blocks_per_stage, int width, int num_classes)
      : conv_(nn::Conv2dOptions(in_channels, width, 3).padding(1).bias(false)), bn_(width) {
    register_module("conv", conv_);
    register_module("bn", bn_);
    int c = width;
    for (int s = 0; s < 3; ++s) {
      const int out = width << s;
      for (int b = 0; b < blocks_per_stage; ++b) {
        blocks_->push_back(BasicBlock(c, out, (s > 0 && b == 0) ? 2 : 1));
        c = out;
      }
    }
    register_module("blocks", blocks_);
    head_ = register_module("head", nn::Linear(c, num_classes));
    for (auto& m : modules(false)) {
      if (auto* conv = m->as<nn::Conv2d>()) nn::init::kaiming_normal_(conv->weight);
      if (auto* lin = m->as<nn::Linear>()) nn::init::kaiming_normal_(lin->weight);
    }
  }

  torch::Tensor forward(torch::Tensor x) override {
    x = torch::relu(bn_(conv_(x)));
    x = blocks_->forward(x);
    x = x.mean({2, 3});
    return head_->forward(x);
  }

 private:
  nn::Conv2d conv_;
  nn::BatchNorm2d bn_;
  nn::Sequential blocks_;
  nn::Linear head_{nullptr};
};

}  // namespace

std::shared_ptr<ClassifierNet> build_backbone(const BackboneSpec& spec) {
  if (spec.num_classes < 1) throw std::invalid_argument("build_backbone: num_classes must be >= 1");
  if (spec.input_shape.channels < 1 || spec.input_shape.height < 1 || spec.input_shape.width < 1)
    throw std::invalid_argument("build_backbone: invalid input shape");
  const int c = spec.input_shape.channels;
  if (spec.architecture == "simple_cnn") return std::make_shared<SimpleCnn>(spec.input_shape, spec.width, spec.num_classes);
  if (spec.architecture == "resnet20") return std::make_shared<CifarResNet>(c, 3, spec.width, spec.num_classes);
  if (spec.architecture == "resnet32") return std::make_shared<CifarResNet>(c, 5, spec.width, spec.num_classes);
  throw std::invalid_argument("unknown architecture '" + spec.architecture + "' (simple_cnn|resnet20|resnet32)");
}

std::int64_t parameter_count(torch::nn::Module& module) {
  std::int64_t n = 0;
  for (const auto& p : module.parameters()) n += p.numel();
  return n;
}

}  // namespace invlab::train
