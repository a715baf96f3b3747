#include "ptgnn/app/gradcheck_suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>

#include "ptgnn/ad/gradcheck.hpp"
#include "ptgnn/ad/ops.hpp"
#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/common/rng.hpp"
#include "ptgnn/graph/builders.hpp"
#include "ptgnn/loss/losses.hpp"
#include "ptgnn/nn/model.hpp"

namespace ptgnn::app {

namespace {

constexpr std::size_t kMaxAttempts = 200;

using BuildFn = std::function<ad::Var(ad::Tape&, std::span<const ad::Var> bound, std::span<const ad::Var> inputs)>;

/// A differentiable function of parameters and inputs, checked jointly.
struct Component {
  nn::ModelParams params;
  std::vector<ad::Tensor> inputs;
  BuildFn build;
};

using Generator = std::function<Component(Rng&)>;

ad::Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  ad::Tensor t({rows, cols});
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

/// Fan-scaled weights and small non-zero biases, so activations stay O(1) at any width.
void randomize(nn::ModelParams& params, Rng& rng) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& t = params.block(i).value;
    const bool weight = params.block(i).name.ends_with(".weight");
    const double a = weight ? std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols())) : 0.1;
    for (double& v : t.values()) v = rng.uniform(-a, a);
  }
}

struct Evaluation {
  double value = 0.0;
  double kink_margin = 0.0;
};

/// y = sum(out * R) for a fixed random R, so every output coordinate matters. R is
/// scaled by 1/sqrt(numel) to keep |y| near 1, which bounds finite-difference round-off.
class Objective {
 public:
  Objective(const Component& c, Rng& rng) : c_(c), rng_(rng) {}

  std::size_t size() const {
    std::size_t n = c_.params.count();
    for (const auto& t : c_.inputs) n += t.numel();
    return n;
  }

  std::vector<double> initial() const {
    auto flat = c_.params.flatten();
    for (const auto& t : c_.inputs) flat.insert(flat.end(), t.values().begin(), t.values().end());
    return flat;
  }

  Evaluation operator()(std::span<const double> flat, std::span<double> grad) {
    nn::ModelParams params = c_.params;
    const std::size_t np = params.count();
    params.assign(flat.first(np));
    ad::Tape tape;
    const auto bound = params.bind(tape);
    std::vector<ad::Var> inputs;
    std::size_t offset = np;
    for (const auto& t : c_.inputs) {
      ad::Tensor v(t.shape(), std::vector<double>(flat.begin() + offset, flat.begin() + offset + t.numel()));
      offset += t.numel();
      inputs.push_back(tape.input(std::move(v)));
    }
    const ad::Var out = c_.build(tape, bound, inputs);
    if (weights_.empty()) {
      const auto& o = tape.value(out);
      weights_ = random_tensor(rng_, o.rows(), o.cols(), 1.0 / std::sqrt(static_cast<double>(o.numel())));
    }
    const ad::Var y = ad::sum_all(tape, ad::mul(tape, out, tape.constant(weights_)));
    Evaluation e{tape.value(y).item(), tape.kink_margin()};
    if (!grad.empty()) {
      tape.backward(y);
      auto g = nn::ModelParams::gather_grads(tape, bound);
      for (auto v : inputs) {
        const auto gi = tape.grad(v);
        g.insert(g.end(), gi.values().begin(), gi.values().end());
      }
      std::copy(g.begin(), g.end(), grad.begin());
    }
    return e;
  }

 private:
  const Component& c_;
  Rng& rng_;
  ad::Tensor weights_;
};

GradCheckEntry check_component(const std::string& name, const Generator& gen, std::uint64_t seed, std::uint64_t index,
                               double tolerance) {
  GradCheckEntry entry;
  entry.component = name;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    entry.attempts = attempt + 1;
    Rng rng(derive_seed(seed, Stream::GradCheck, index * kMaxAttempts + attempt));
    const Component c = gen(rng);
    Objective obj(c, rng);
    const auto x0 = obj.initial();
    std::vector<double> g0(x0.size());
    Evaluation e0;
    try {
      e0 = obj(x0, g0);
    } catch (const std::exception& ex) {
      entry.note = ex.what();
      return entry;
    }
    if (e0.kink_margin < kKinkMargin) continue;

    const ad::ScalarFunction f = [&](std::span<const double> x, std::span<double> g) { return obj(x, g).value; };
    const auto r = ad::finite_diff_check(f, x0);
    entry.coords = x0.size();
    entry.max_rel_error = r.max_rel_error;
    entry.worst_index = r.worst_index;
    entry.passed = r.max_rel_error < tolerance;
    if (!entry.passed) {
      entry.note = "analytic " + format_double(r.worst_analytic) + " vs numeric " + format_double(r.worst_numeric);
    }
    return entry;
  }
  entry.note = "no instance cleared the kink margin";
  return entry;
}

// Small fixed index sets for the segment and gather primitives.
const std::vector<std::size_t> kSegments = {0, 2, 1, 0, 2, 2, 1};
const std::vector<std::size_t> kGather = {3, 0, 0, 2, 1};

Component op_instance(std::vector<ad::Tensor> inputs, BuildFn build) {
  Component c;
  c.inputs = std::move(inputs);
  c.build = std::move(build);
  return c;
}

std::vector<std::pair<std::string, Generator>> op_generators() {
  using ad::Var;
  using Span = std::span<const Var>;
  std::vector<std::pair<std::string, Generator>> g;
  auto unary = [&](const char* name, std::function<Var(ad::Tape&, Var)> f) {
    g.emplace_back(std::string("op:") + name, [f](Rng& rng) {
      return op_instance({random_tensor(rng, 3, 4)},
                         [f](ad::Tape& t, Span, Span in) { return f(t, in[0]); });
    });
  };
  auto binary = [&](const char* name, std::function<Var(ad::Tape&, Var, Var)> f) {
    g.emplace_back(std::string("op:") + name, [f](Rng& rng) {
      return op_instance({random_tensor(rng, 3, 4), random_tensor(rng, 3, 4)},
                         [f](ad::Tape& t, Span, Span in) { return f(t, in[0], in[1]); });
    });
  };

  g.emplace_back("op:matmul", [](Rng& rng) {
    return op_instance({random_tensor(rng, 3, 4), random_tensor(rng, 4, 2)},
                       [](ad::Tape& t, Span, Span in) { return ad::matmul(t, in[0], in[1]); });
  });
  g.emplace_back("op:add_bias", [](Rng& rng) {
    return op_instance({random_tensor(rng, 3, 4), random_tensor(rng, 1, 4)},
                       [](ad::Tape& t, Span, Span in) { return ad::add_bias(t, in[0], in[1]); });
  });
  unary("relu", [](ad::Tape& t, Var x) { return ad::relu(t, x); });
  unary("tanh", [](ad::Tape& t, Var x) { return ad::tanh(t, x); });
  unary("sigmoid", [](ad::Tape& t, Var x) { return ad::sigmoid(t, x); });
  unary("neg", [](ad::Tape& t, Var x) { return ad::neg(t, x); });
  unary("scale", [](ad::Tape& t, Var x) { return ad::scale(t, x, -1.7); });
  binary("add", [](ad::Tape& t, Var a, Var b) { return ad::add(t, a, b); });
  binary("sub", [](ad::Tape& t, Var a, Var b) { return ad::sub(t, a, b); });
  binary("mul", [](ad::Tape& t, Var a, Var b) { return ad::mul(t, a, b); });
  g.emplace_back("op:mul_broadcast", [](Rng& rng) {
    return op_instance({random_tensor(rng, 3, 4), random_tensor(rng, 1, 1)},
                       [](ad::Tape& t, Span, Span in) { return ad::mul(t, in[0], in[1]); });
  });
  g.emplace_back("op:segment_softmax", [](Rng& rng) {
    return op_instance({random_tensor(rng, kSegments.size(), 1)},
                       [](ad::Tape& t, Span, Span in) { return ad::segment_softmax(t, in[0], kSegments, 4); });
  });
  g.emplace_back("op:segment_sum", [](Rng& rng) {
    return op_instance({random_tensor(rng, kSegments.size(), 3)},
                       [](ad::Tape& t, Span, Span in) { return ad::segment_sum(t, in[0], kSegments, 4); });
  });
  g.emplace_back("op:segment_max", [](Rng& rng) {
    return op_instance({random_tensor(rng, kSegments.size(), 3)},
                       [](ad::Tape& t, Span, Span in) { return ad::segment_max(t, in[0], kSegments, 4); });
  });
  g.emplace_back("op:concat", [](Rng& rng) {
    return op_instance({random_tensor(rng, 3, 2), random_tensor(rng, 3, 4), random_tensor(rng, 2, 6)},
                       [](ad::Tape& t, Span, Span in) {
                         const Var cols[] = {in[0], in[1]};
                         const Var rows[] = {ad::concat(t, cols, 1), in[2]};
                         return ad::concat(t, rows, 0);
                       });
  });
  g.emplace_back("op:gather_rows", [](Rng& rng) {
    return op_instance({random_tensor(rng, 4, 3)},
                       [](ad::Tape& t, Span, Span in) { return ad::gather_rows(t, in[0], kGather); });
  });
  g.emplace_back("op:mean_rows", [](Rng& rng) {
    return op_instance({random_tensor(rng, 5, 3)}, [](ad::Tape& t, Span, Span in) {
      const Var parts[] = {ad::mean_rows(t, in[0]), ad::mean_rows(t, in[0], std::span(kSegments).first(5), 4)};
      return ad::concat(t, parts, 0);
    });
  });
  g.emplace_back("op:sum_all", [](Rng& rng) {
    return op_instance({random_tensor(rng, 3, 4)}, [](ad::Tape& t, Span, Span in) { return ad::sum_all(t, in[0]); });
  });
  return g;
}

std::vector<graph::Edge> topology_for(const nn::ModelConfig& config) {
  using graph::GraphMethod;
  switch (config.graph_spec.method) {
    case GraphMethod::StationNode:
      return config.graph_spec.edge_mode == graph::EdgeMode::FullyConnected ? graph::fully_connected_edges(4)
                                                                            : graph::sequential_chain_edges();
    case GraphMethod::FeatureNode: return graph::feature_hub_edges();
    case GraphMethod::BendingCentric:
    case GraphMethod::EtaCentric: return graph::fully_connected_edges(4);
  }
  return {};
}

std::vector<std::pair<std::string, Generator>> component_generators(const nn::ModelConfig& config) {
  using ad::Var;
  using Span = std::span<const Var>;
  std::vector<std::pair<std::string, Generator>> g;
  const std::size_t n = graph::num_nodes(config.graph_spec.method);
  const std::size_t f_in = config.node_dim();
  const std::size_t f_out = config.embed_dim;
  const auto edges = topology_for(config);

  auto mpl = [&](std::size_t edge_in) {
    return [=](Rng& rng) {
      Component c;
      nn::MplDims dims;
      dims.in = f_in;
      dims.out = f_out;
      dims.edge_in = edge_in;
      dims.edge_embed = config.edge_embed_dim;
      dims.edge_hidden = config.edge_hidden_dim;
      dims.attn = config.attn_dim;
      const auto layer = nn::MplLayer::create(c.params, "mpl", dims);
      randomize(c.params, rng);
      c.inputs.push_back(random_tensor(rng, n, f_in));
      if (edge_in > 0) c.inputs.push_back(random_tensor(rng, edges.size(), edge_in));
      c.build = [layer, edges, edge_in](ad::Tape& t, Span bound, Span in) {
        std::optional<Var> attr;
        if (edge_in > 0) attr = in[1];
        return nn::mpl_forward(t, layer, bound, in[0], edges, attr);
      };
      return c;
    };
  };
  g.emplace_back("layer:mpl", mpl(0));
  g.emplace_back("layer:mpl_edge_attr", mpl(3));

  g.emplace_back("layer:edgeconv", [=](Rng& rng) {
    Component c;
    const auto layer = nn::EdgeConvLayer::create(c.params, "edgeconv", f_in, f_out, config.edgeconv_mlp_layers);
    randomize(c.params, rng);
    c.inputs.push_back(random_tensor(rng, n, f_in));
    c.build = [layer, edges](ad::Tape& t, Span bound, Span in) {
      return nn::edgeconv_forward(t, layer, bound, in[0], edges);
    };
    return c;
  });

  g.emplace_back("layer:gcn", [=](Rng& rng) {
    Component c;
    const auto layer = nn::GcnLayer::create(c.params, "gcn", f_in, f_out);
    randomize(c.params, rng);
    c.inputs.push_back(random_tensor(rng, n, f_in));
    c.build = [layer, edges](ad::Tape& t, Span bound, Span in) { return nn::gcn_forward(t, layer, bound, in[0], edges); };
    return c;
  });

  g.emplace_back("head", [=](Rng& rng) {
    Component c;
    std::vector<nn::Linear> head;
    std::size_t width = f_out;
    const auto dims = config.resolved_head_dims();
    for (std::size_t k = 0; k < dims.size(); ++k) {
      head.push_back(nn::add_linear(c.params, "head" + std::to_string(k), width, dims[k]));
      width = dims[k];
    }
    randomize(c.params, rng);
    c.inputs.push_back(random_tensor(rng, n, f_out));
    c.build = [head](ad::Tape& t, Span bound, Span in) {
      Var x = ad::mean_rows(t, in[0]);
      for (std::size_t k = 0; k < head.size(); ++k) {
        x = head[k].apply(t, bound, x);
        if (k + 1 < head.size()) x = ad::relu(t, x);
      }
      return x;
    };
    return c;
  });

  g.emplace_back("model", [=](Rng& rng) {
    auto model = std::make_shared<nn::Model>(config);
    Component c;
    c.params = model->params();
    randomize(c.params, rng);
    c.inputs.push_back(random_tensor(rng, n, f_in));
    const std::size_t de = config.edge_dim();
    if (de > 0) c.inputs.push_back(random_tensor(rng, edges.size(), de));
    c.build = [model, edges, de](ad::Tape& t, Span bound, Span in) {
      std::optional<Var> attr;
      if (de > 0) attr = in[1];
      return model->forward(t, bound, in[0], edges, attr);
    };
    return c;
  });

  auto loss_gen = [](loss::LossConfig cfg) {
    return [cfg](Rng& rng) {
      constexpr std::size_t kBatch = 6;
      std::vector<double> truth(kBatch);
      ad::Tensor pred({kBatch, 1});
      for (std::size_t i = 0; i < kBatch; ++i) {
        // Truths straddle the weight steps at 80 and 160.
        truth[i] = std::array{30.0, 95.0, 200.0}[i % 3] + rng.uniform(-5.0, 5.0);
        double p = truth[i] + rng.normal() * 10.0;
        // Keep the custom loss away from its clamp at lpl.
        if (std::abs(p - cfg.lpl) < 0.1) p = cfg.lpl + 0.5;
        pred[i] = p;
      }
      if (cfg.kind == loss::LossKind::CustomPt) pred[0] = cfg.lpl - 1.0;  // clamped branch
      Component c;
      c.inputs.push_back(pred);
      c.build = [cfg, truth](ad::Tape& t, Span, Span in) { return loss::loss_on_tape(t, in[0], truth, cfg); };
      return c;
    };
  };
  for (auto kind : {loss::LossKind::MSE, loss::LossKind::PtInformed, loss::LossKind::CustomPt}) {
    loss::LossConfig cfg = config.loss;
    cfg.kind = kind;
    g.emplace_back("loss:" + std::string(loss::to_string(kind)), loss_gen(cfg));
  }
  return g;
}

}  // namespace

bool GradCheckReport::all_passed() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

std::vector<std::string> GradCheckReport::failures() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (!e.passed) out.push_back(e.component);
  }
  return out;
}

GradCheckReport run_gradcheck(const nn::ModelConfig& config, std::uint64_t seed, double tolerance) {
  config.validate();
  GradCheckReport report;
  report.tolerance = tolerance;
  std::uint64_t index = 0;
  for (const auto& [name, gen] : op_generators()) {
    report.entries.push_back(check_component(name, gen, seed, index++, tolerance));
  }
  for (const auto& [name, gen] : component_generators(config)) {
    report.entries.push_back(check_component(name, gen, seed, index++, tolerance));
  }
  return report;
}

void write_gradcheck_report(std::ostream& out, const GradCheckReport& report) {
  out << "component,coords,attempts,max_rel_error,worst_index,status,note\n";
  for (const auto& e : report.entries) {
    std::string note = e.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << e.component << ',' << e.coords << ',' << e.attempts << ',' << format_double(e.max_rel_error) << ','
        << e.worst_index << ',' << (e.passed ? "PASS" : "FAIL") << ',' << note << '\n';
  }
}

}  // namespace ptgnn::app
