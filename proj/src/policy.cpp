#include "falsify/policy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "falsify/errors.hpp"
#include "falsify/trace.hpp"

namespace falsify {

namespace {

constexpr const char* kCheckpointMagic = "falsify-policy";
constexpr int kCheckpointVersion = 1;

// y[rows] += W[rows x cols] * x[cols]
void matvec_add(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y[cols] += W^T x[rows]
void matvec_t_add(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * xi;
  }
}

// G[rows x cols] += scale * a[rows] (outer) b[cols]
void outer_add(double* g, const double* a, const double* b, std::size_t rows, std::size_t cols, double scale) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double ai = a[i] * scale;
    if (ai == 0.0) continue;
    double* row = g + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += ai * b[j];
  }
}

void check_action(const Policy& policy, std::span<const std::size_t> action, const char* what) {
  if (action.size() != policy.slots()) {
    throw ConfigError(std::string(what) + " has " + std::to_string(action.size()) + " slots, policy has " +
                      std::to_string(policy.slots()));
  }
  for (std::size_t k = 0; k < action.size(); ++k) {
    if (action[k] >= policy.shape().head_sizes[k]) {
      throw BoundsError(std::string(what) + " index out of range at slot " + std::to_string(k));
    }
  }
}

}  // namespace

void PolicyShape::validate() const {
  if (head_sizes.empty()) throw ConfigError("policy needs at least one head");
  for (auto k : head_sizes) {
    if (k == 0) throw ConfigError("policy head size must be >= 1");
  }
  if (hidden == 0) throw ConfigError("train.hidden must be >= 1");
  if (layers == 0) throw ConfigError("train.layers must be >= 1");
}

Policy::Policy(PolicyShape shape) : shape_(std::move(shape)) {
  shape_.validate();
  const std::size_t h = shape_.hidden;
  std::size_t off = 0;
  for (auto k : shape_.head_sizes) {
    embed_off_.push_back(off);
    off += k * h;
  }
  for (std::size_t l = 0; l < shape_.layers; ++l) {
    layer_off_.push_back(off);
    off += 2 * h * h + h;
  }
  for (auto k : shape_.head_sizes) {
    head_off_.push_back(off);
    off += k * h + k;
  }
  theta_.assign(off, 0.0);
}

Policy Policy::initialized(PolicyShape shape, Rng& rng, double scale) {
  Policy p(std::move(shape));
  std::uniform_real_distribution<double> u(-scale, scale);
  const std::size_t h = p.hidden();
  auto fill = [&](std::size_t off, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p.theta_[off + i] = u(rng);
  };
  for (std::size_t k = 0; k < p.slots(); ++k) fill(p.embedding_offset(k), p.shape_.head_sizes[k] * h);
  for (std::size_t l = 0; l < p.layers(); ++l) fill(p.wx_offset(l), 2 * h * h);
  for (std::size_t k = 0; k < p.slots(); ++k) fill(p.head_w_offset(k), p.shape_.head_sizes[k] * h);
  return p;
}

void Policy::check_compatible(std::span<const std::size_t> head_sizes) const {
  if (!std::equal(head_sizes.begin(), head_sizes.end(), shape_.head_sizes.begin(), shape_.head_sizes.end())) {
    throw ConfigError("policy heads do not match the parameter space bin counts");
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

ForwardPass forward(const Policy& policy, std::span<const std::size_t> prev_action) {
  check_action(policy, prev_action, "previous action");
  const auto theta = policy.params();
  const std::size_t h = policy.hidden();
  const std::size_t layers = policy.layers();
  const std::size_t slots = policy.slots();

  ForwardPass pass;
  pass.hidden.assign(slots * layers * h, 0.0);
  pass.logits.resize(slots);
  pass.probs.resize(slots);

  std::vector<double> pre(h);
  for (std::size_t k = 0; k < slots; ++k) {
    const double* input = theta.data() + policy.embedding_offset(k) + prev_action[k] * h;
    for (std::size_t l = 0; l < layers; ++l) {
      std::copy_n(theta.data() + policy.bias_offset(l), h, pre.begin());
      matvec_add(theta.data() + policy.wx_offset(l), input, pre.data(), h, h);
      if (k > 0) {
        const double* prev_h = pass.hidden.data() + ((k - 1) * layers + l) * h;
        matvec_add(theta.data() + policy.wh_offset(l), prev_h, pre.data(), h, h);
      }
      double* out = pass.hidden.data() + (k * layers + l) * h;
      for (std::size_t i = 0; i < h; ++i) out[i] = std::tanh(pre[i]);
      input = out;
    }
    const std::size_t n = policy.shape().head_sizes[k];
    auto& logits = pass.logits[k];
    logits.assign(theta.begin() + static_cast<std::ptrdiff_t>(policy.head_b_offset(k)),
                  theta.begin() + static_cast<std::ptrdiff_t>(policy.head_b_offset(k) + n));
    matvec_add(theta.data() + policy.head_w_offset(k), input, logits.data(), n, h);
    pass.probs[k] = softmax(logits);
  }
  return pass;
}

ActionSample sample_action(const std::vector<std::vector<double>>& probs, Rng& rng) {
  ActionSample s;
  s.indices.reserve(probs.size());
  s.log_probs.reserve(probs.size());
  for (const auto& p : probs) {
    std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
    const std::size_t idx = dist(rng);
    s.indices.push_back(idx);
    s.log_probs.push_back(std::log(p[idx]));
    s.total_log_prob += s.log_probs.back();
  }
  return s;
}

double log_prob(const Policy& policy, std::span<const std::size_t> prev_action,
                std::span<const std::size_t> action) {
  check_action(policy, action, "action");
  const auto pass = forward(policy, prev_action);
  double total = 0.0;
  for (std::size_t k = 0; k < action.size(); ++k) {
    // log-softmax computed directly from logits for accuracy at extreme probabilities
    const auto& z = pass.logits[k];
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    total += z[action[k]] - m - std::log(sum);
  }
  return total;
}

void accumulate_grad_log_prob(const Policy& policy, std::span<const std::size_t> prev_action,
                              std::span<const std::size_t> action, double scale, std::span<double> grad) {
  check_action(policy, action, "action");
  if (grad.size() != policy.num_params()) throw ConfigError("gradient buffer has wrong size");
  if (scale == 0.0) return;

  const auto pass = forward(policy, prev_action);
  const auto theta = policy.params();
  const std::size_t h = policy.hidden();
  const std::size_t layers = policy.layers();
  const std::size_t slots = policy.slots();

  // Gradient arriving at h[l] of slot k from slot k+1 through Wh_l.
  std::vector<double> carry(layers * h, 0.0);
  std::vector<double> dh(h), dpre(h), dx(h);

  for (std::size_t k = slots; k-- > 0;) {
    const std::size_t n = policy.shape().head_sizes[k];
    std::vector<double> dlogit(pass.probs[k]);
    for (auto& v : dlogit) v = -v;
    dlogit[action[k]] += 1.0;

    const double* h_top = pass.hidden.data() + (k * layers + layers - 1) * h;
    outer_add(grad.data() + policy.head_w_offset(k), dlogit.data(), h_top, n, h, scale);
    for (std::size_t i = 0; i < n; ++i) grad[policy.head_b_offset(k) + i] += scale * dlogit[i];

    std::fill(dh.begin(), dh.end(), 0.0);
    matvec_t_add(theta.data() + policy.head_w_offset(k), dlogit.data(), dh.data(), n, h);

    for (std::size_t l = layers; l-- > 0;) {
      const double* h_cur = pass.hidden.data() + (k * layers + l) * h;
      double* carry_l = carry.data() + l * h;
      for (std::size_t i = 0; i < h; ++i) dpre[i] = (dh[i] + carry_l[i]) * (1.0 - h_cur[i] * h_cur[i]);

      const double* input = l == 0 ? theta.data() + policy.embedding_offset(k) + prev_action[k] * h
                                   : pass.hidden.data() + (k * layers + l - 1) * h;
      outer_add(grad.data() + policy.wx_offset(l), dpre.data(), input, h, h, scale);
      for (std::size_t i = 0; i < h; ++i) grad[policy.bias_offset(l) + i] += scale * dpre[i];

      std::fill(carry_l, carry_l + h, 0.0);
      if (k > 0) {
        const double* h_prev = pass.hidden.data() + ((k - 1) * layers + l) * h;
        outer_add(grad.data() + policy.wh_offset(l), dpre.data(), h_prev, h, h, scale);
        matvec_t_add(theta.data() + policy.wh_offset(l), dpre.data(), carry_l, h, h);
      }

      std::fill(dx.begin(), dx.end(), 0.0);
      matvec_t_add(theta.data() + policy.wx_offset(l), dpre.data(), dx.data(), h, h);
      if (l == 0) {
        double* g = grad.data() + policy.embedding_offset(k) + prev_action[k] * h;
        for (std::size_t i = 0; i < h; ++i) g[i] += scale * dx[i];
      } else {
        dh = dx;
      }
    }
  }
}

std::vector<double> grad_log_prob(const Policy& policy, std::span<const std::size_t> prev_action,
                                  std::span<const std::size_t> action) {
  std::vector<double> g(policy.num_params(), 0.0);
  accumulate_grad_log_prob(policy, prev_action, action, 1.0, g);
  return g;
}

std::vector<std::size_t> modal_action(const ForwardPass& pass) {
  std::vector<std::size_t> a;
  a.reserve(pass.probs.size());
  for (const auto& p : pass.probs) {
    a.push_back(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
  return a;
}

void save_checkpoint(std::ostream& out, const Policy& policy, std::uint64_t space_fingerprint) {
  std::ostringstream fp;
  fp << std::hex << std::setw(16) << std::setfill('0') << space_fingerprint;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "fingerprint " << fp.str() << '\n';
  out << "hidden " << policy.hidden() << '\n';
  out << "layers " << policy.layers() << '\n';
  out << "heads";
  for (auto k : policy.shape().head_sizes) out << ' ' << k;
  out << '\n';
  out << "params " << policy.num_params() << '\n';
  for (double v : policy.params()) out << format_double(v) << '\n';
  if (!out) throw IoError("failed writing checkpoint");
}

Policy load_checkpoint(std::istream& in, std::uint64_t expected_fingerprint) {
  std::string magic, key;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic || version != kCheckpointVersion) {
    throw ValidationError("not a policy checkpoint");
  }
  std::string fp_text;
  PolicyShape shape;
  std::size_t count = 0;
  if (!(in >> key >> fp_text) || key != "fingerprint") throw ValidationError("checkpoint missing fingerprint");
  if (!(in >> key >> shape.hidden) || key != "hidden") throw ValidationError("checkpoint missing hidden size");
  if (!(in >> key >> shape.layers) || key != "layers") throw ValidationError("checkpoint missing layer count");
  if (!(in >> key) || key != "heads") throw ValidationError("checkpoint missing heads");
  std::string line;
  std::getline(in, line);
  std::istringstream heads(line);
  for (std::size_t k; heads >> k;) shape.head_sizes.push_back(k);
  if (!(in >> key >> count) || key != "params") throw ValidationError("checkpoint missing parameter count");

  const std::uint64_t fingerprint = std::stoull(fp_text, nullptr, 16);
  if (fingerprint != expected_fingerprint) {
    throw ValidationError("checkpoint was written for a different parameter space");
  }
  Policy policy(shape);
  if (count != policy.num_params()) throw ValidationError("checkpoint parameter count does not match its header");
  std::string token;
  for (auto& v : policy.params()) {
    if (!(in >> token)) throw ValidationError("checkpoint truncated");
    v = std::stod(token);
  }
  return policy;
}

}  // namespace falsify
