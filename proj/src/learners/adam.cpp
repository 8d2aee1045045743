#include "mkteff/learners/adam.hpp"

namespace mkteff {

AdamState::AdamState(const AdamConfig& config, std::span<Matrix* const> params) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto* p : params) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void AdamState::apply(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    params[i]->array() -=
        config_.step * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace mkteff
