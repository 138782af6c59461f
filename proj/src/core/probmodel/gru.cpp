#include "gru.hpp"

namespace stoat {

namespace {

Eigen::ArrayXd gate(const Eigen::ArrayXd& a) { return 1.0 / (1.0 + (-a).exp()); }

}  // namespace

Eigen::VectorXd gru_forward(const GruWeights& w, const Eigen::VectorXd& h_prev,
                            const Eigen::VectorXd& x, GruStepCache* cache) {
  const Eigen::Index h = h_prev.size();
  const Eigen::VectorXd a = w.wx * x + w.bx;
  const Eigen::VectorXd b = w.wh * h_prev + w.bh;
  const Eigen::ArrayXd r = gate(a.segment(0, h).array() + b.segment(0, h).array());
  const Eigen::ArrayXd u = gate(a.segment(h, h).array() + b.segment(h, h).array());
  const Eigen::ArrayXd hn = b.segment(2 * h, h).array();
  const Eigen::ArrayXd n = (a.segment(2 * h, h).array() + r * hn).tanh();
  Eigen::VectorXd out = ((1.0 - u) * n + u * h_prev.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->r = r.matrix();
    cache->u = u.matrix();
    cache->n = n.matrix();
    cache->hn = hn.matrix();
  }
  return out;
}

void gru_backward(const GruWeights& w, const GruStepCache& c, const Eigen::VectorXd& dh,
                  GruGrads& grads, Eigen::VectorXd& dx, Eigen::VectorXd& dh_prev) {
  const Eigen::Index h = dh.size();
  const Eigen::ArrayXd r = c.r.array();
  const Eigen::ArrayXd u = c.u.array();
  const Eigen::ArrayXd n = c.n.array();

  const Eigen::ArrayXd dn_pre = dh.array() * (1.0 - u) * (1.0 - n * n);
  const Eigen::ArrayXd du_pre = dh.array() * (c.h_prev.array() - n) * u * (1.0 - u);
  const Eigen::ArrayXd dr_pre = dn_pre * c.hn.array() * r * (1.0 - r);

  Eigen::VectorXd da(3 * h);
  da << dr_pre.matrix(), du_pre.matrix(), dn_pre.matrix();
  Eigen::VectorXd db(3 * h);
  db << dr_pre.matrix(), du_pre.matrix(), (dn_pre * r).matrix();

  grads.wx.noalias() += da * c.x.transpose();
  grads.bx += da;
  grads.wh.noalias() += db * c.h_prev.transpose();
  grads.bh += db;

  dx.noalias() = w.wx.transpose() * da;
  dh_prev = (dh.array() * u).matrix();
  dh_prev.noalias() += w.wh.transpose() * db;
}

}  // namespace stoat
