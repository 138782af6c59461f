#pragma once

#include <Eigen/Dense>

namespace stoat {

// Gated recurrent unit, gate blocks stacked as [reset; update; candidate]:
//   r  = sigmoid(Wx_r x + bx_r + Wh_r h + bh_r)
//   u  = sigmoid(Wx_u x + bx_u + Wh_u h + bh_u)
//   n  = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
//   h' = (1 - u) * n + u * h
struct GruWeights {
  Eigen::Ref<const Eigen::MatrixXd> wx;  // 3H x I
  Eigen::Ref<const Eigen::MatrixXd> wh;  // 3H x H
  Eigen::Ref<const Eigen::VectorXd> bx;  // 3H
  Eigen::Ref<const Eigen::VectorXd> bh;  // 3H
};

struct GruGrads {
  Eigen::Ref<Eigen::MatrixXd> wx;
  Eigen::Ref<Eigen::MatrixXd> wh;
  Eigen::Ref<Eigen::VectorXd> bx;
  Eigen::Ref<Eigen::VectorXd> bh;
};

struct GruStepCache {
  Eigen::VectorXd x;
  Eigen::VectorXd h_prev;
  Eigen::VectorXd r;
  Eigen::VectorXd u;
  Eigen::VectorXd n;
  Eigen::VectorXd hn;  // Wh_n h_prev + bh_n
};

Eigen::VectorXd gru_forward(const GruWeights& w, const Eigen::VectorXd& h_prev,
                            const Eigen::VectorXd& x, GruStepCache* cache = nullptr);

// Accumulates parameter gradients into `grads`; writes input and previous
// hidden-state gradients.
void gru_backward(const GruWeights& w, const GruStepCache& cache, const Eigen::VectorXd& dh,
                  GruGrads& grads, Eigen::VectorXd& dx, Eigen::VectorXd& dh_prev);

}  // namespace stoat
