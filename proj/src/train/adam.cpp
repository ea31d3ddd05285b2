#include "train/adam.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace pglake::train {

AdamState AdamState::init(const std::vector<ad::Tensor*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const ad::Tensor* p : params) {
    s.m.emplace_back(p->rows(), p->cols());
    s.v.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(const std::vector<ad::Tensor*>& params, const std::vector<ad::Tensor>& grads,
               AdamState& state, const AdamParams& hp) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor& p = *params[i];
    const ad::Tensor& g = grads[i];
    if (!p.same_shape(g))
      throw ShapeError("adam_step: gradient shape " + g.shape_str() +
                       " does not match parameter " + p.shape_str());
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient");
    ad::Tensor& m = state.m[i];
    ad::Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = hp.beta1 * m[j] + (1.0 - hp.beta1) * g[j];
      v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= hp.rate * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
  }
}

}  // namespace pglake::train
