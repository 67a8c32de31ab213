#include "wsp/mle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

namespace wsp {

std::string_view to_string(Model m) {
  switch (m) {
    case Model::weibull:
      return "weibull";
    case Model::pgw:
      return "pgw";
  }
  return "unknown";
}

std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged:
      return "converged";
    case FitStatus::not_estimable:
      return "not_estimable";
  }
  return "unknown";
}

double weibull_loglik_log_params(const EventTable& s, std::span<const double> log_params,
                                 std::span<double> gradient) {
  if (log_params.size() != 2 || gradient.size() != 2) {
    throw std::invalid_argument("Weibull log-likelihood takes two log-parameters");
  }
  const double log_shape = log_params[0];
  const double log_rate = log_params[1];
  const double shape = std::exp(log_shape);

  double ll = 0.0;
  double d_shape = 0.0;
  double d_rate = 0.0;
  for (const auto& r : s.rows()) {
    const double log_t = std::log(r.time);
    // u = log cumulative hazard = shape * (log rate + log t)
    const double u_raw = shape * (log_rate + log_t);
    const double u = detail::clamp_log_power(u_raw);
    const double cumhaz = std::exp(u);
    if (r.events > 0.0) {
      ll += r.events * (log_shape + shape * log_rate + (shape - 1.0) * log_t);
      d_shape += r.events * (1.0 + u_raw);
      d_rate += r.events * shape;
    }
    ll -= r.total * cumhaz;
    if (u == u_raw) {
      d_shape -= r.total * cumhaz * u_raw;
      d_rate -= r.total * cumhaz * shape;
    }
  }
  gradient[0] = d_shape;
  gradient[1] = d_rate;
  return ll;
}

double pgw_loglik_log_params(const EventTable& s, std::span<const double> log_params,
                             std::span<double> gradient) {
  if (log_params.size() != 3 || gradient.size() != 3) {
    throw std::invalid_argument("PGW log-likelihood takes three log-parameters");
  }
  const double log_nu = log_params[0];
  const double log_gamma = log_params[1];
  const double log_scale = log_params[2];
  const double nu = std::exp(log_nu);
  const double inv_gamma = std::exp(-log_gamma);

  double ll = 0.0;
  double d_nu = 0.0;
  double d_gamma = 0.0;
  double d_scale = 0.0;
  for (const auto& r : s.rows()) {
    const double log_t = std::log(r.time);
    // L = log((t / scale)^nu), w = z / (1 + z) with z = exp(L)
    const double l_raw = nu * (log_t - log_scale);
    const double l = detail::clamp_log_power(l_raw);
    const double inside = l == l_raw ? 1.0 : 0.0;
    const double log1p_z = detail::log1p_exp(l);
    const double w = 1.0 / (1.0 + std::exp(-l));
    const double s_exp = log1p_z * inv_gamma;
    const double cumhaz = std::expm1(s_exp);
    const double e_s = std::exp(s_exp);

    if (r.events > 0.0) {
      ll += r.events * (log_nu - log_gamma - nu * log_scale + (nu - 1.0) * log_t +
                        (inv_gamma - 1.0) * log1p_z);
      d_nu += r.events * (1.0 + l_raw + inside * (inv_gamma - 1.0) * w * l);
      d_gamma += r.events * (-1.0 - s_exp);
      d_scale += r.events * (-nu - inside * (inv_gamma - 1.0) * w * nu);
    }
    ll -= r.total * cumhaz;
    d_nu -= r.total * e_s * inside * w * l * inv_gamma;
    d_gamma -= r.total * e_s * (-s_exp);
    d_scale -= r.total * e_s * inside * (-w * nu * inv_gamma);
  }
  gradient[0] = d_nu;
  gradient[1] = d_gamma;
  gradient[2] = d_scale;
  return ll;
}

namespace {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int N>
using Mat = Eigen::Matrix<double, N, N>;

bool all_finite(double f, const auto& g) { return std::isfinite(f) && g.allFinite(); }

// Minimizes the negative log-likelihood with BFGS. `loglik(x, grad)` returns
// the log-likelihood at log-parameters x and writes its gradient.
template <int N, class LogLik>
class Maximizer {
 public:
  Maximizer(LogLik loglik, const OptimizerOptions& options) : loglik_(loglik), options_(options) {}

  FitResult run(Model model, Vec<N> x) {
    FitResult result;
    result.model = model;
    result.status = FitStatus::not_estimable;

    Vec<N> g;
    double f = objective(x, g);
    if (!all_finite(f, g)) {
      return result;
    }

    Mat<N> inv_hessian = initial_inverse_hessian(x, g);
    int iter = 0;
    bool converged = g.cwiseAbs().maxCoeff() < options_.gradient_tolerance;
    while (!converged && iter < options_.max_iterations) {
      Vec<N> dir = -inv_hessian * g;
      if (!(g.dot(dir) < 0.0)) {
        inv_hessian = Mat<N>::Identity() / std::max(1.0, g.cwiseAbs().maxCoeff());
        dir = -inv_hessian * g;
      }
      const double longest = dir.cwiseAbs().maxCoeff();
      if (longest > kMaxStep) {
        dir *= kMaxStep / longest;
      }

      Vec<N> x_new;
      Vec<N> g_new;
      double f_new = 0.0;
      if (!line_search(x, f, g, dir, x_new, f_new, g_new)) {
        result.iterations = iter;
        return result;
      }
      ++iter;

      const Vec<N> step = x_new - x;
      const Vec<N> dg = g_new - g;
      const double sy = step.dot(dg);
      if (sy > 1e-12 * step.norm() * dg.norm()) {
        const Vec<N> hy = inv_hessian * dg;
        const double rho = 1.0 / sy;
        inv_hessian += (rho * rho * dg.dot(hy) + rho) * step * step.transpose() -
                       rho * (hy * step.transpose() + step * hy.transpose());
      }
      x = x_new;
      g = g_new;
      f = f_new;
      converged = g.cwiseAbs().maxCoeff() < options_.gradient_tolerance;
    }
    result.iterations = iter;
    result.loglik = -f;
    if (!converged) {
      return result;
    }

    const Mat<N> info = numeric_hessian(x);
    if (!info.allFinite()) {
      return result;
    }
    Eigen::SelfAdjointEigenSolver<Mat<N>> eig(info);
    if (eig.info() != Eigen::Success ||
        eig.eigenvalues().minCoeff() <= options_.min_information_eigenvalue) {
      return result;
    }
    const Mat<N> cov = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();

    std::vector<double> estimates(N);
    std::vector<double> log_se(N);
    for (int i = 0; i < N; ++i) {
      estimates[i] = std::exp(x(i));
      log_se[i] = std::sqrt(cov(i, i));
      if (!(estimates[i] > 0.0) || !std::isfinite(estimates[i]) || !(log_se[i] > 0.0) ||
          !std::isfinite(log_se[i])) {
        return result;
      }
    }
    result.status = FitStatus::converged;
    result.estimates = std::move(estimates);
    result.log_se = std::move(log_se);
    return result;
  }

 private:
  static constexpr double kMaxStep = 2.0;

  double objective(const Vec<N>& x, Vec<N>& g) const {
    std::array<double, N> grad{};
    const double ll = loglik_(std::span<const double>(x.data(), N), std::span<double>(grad));
    for (int i = 0; i < N; ++i) {
      g(i) = -grad[i];
    }
    return -ll;
  }

  // Central differences of the analytic gradient of the negative loglik.
  Mat<N> numeric_hessian(const Vec<N>& x) const {
    Mat<N> h;
    for (int i = 0; i < N; ++i) {
      const double step = 1e-4 * std::max(1.0, std::abs(x(i)));
      Vec<N> xp = x;
      Vec<N> xm = x;
      xp(i) += step;
      xm(i) -= step;
      Vec<N> gp;
      Vec<N> gm;
      objective(xp, gp);
      objective(xm, gm);
      h.col(i) = (gp - gm) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
  }

  Mat<N> initial_inverse_hessian(const Vec<N>& x, const Vec<N>& g) const {
    const Mat<N> h = numeric_hessian(x);
    if (h.allFinite()) {
      Eigen::SelfAdjointEigenSolver<Mat<N>> eig(h);
      if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0) {
        return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
               eig.eigenvectors().transpose();
      }
    }
    return Mat<N>::Identity() / std::max(1.0, g.cwiseAbs().maxCoeff());
  }

  // Backtracking Armijo search. Near the optimum the objective stops
  // changing at double precision before the gradient is small enough, so a
  // step that leaves f unchanged within rounding but shrinks the gradient is
  // also accepted.
  bool line_search(const Vec<N>& x, double f, const Vec<N>& g, const Vec<N>& dir, Vec<N>& x_new,
                   double& f_new, Vec<N>& g_new) const {
    const double slope = g.dot(dir);
    const double noise = 1e-12 * std::max(1.0, std::abs(f));
    const double g_max = g.cwiseAbs().maxCoeff();
    double t = 1.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      x_new = x + t * dir;
      f_new = objective(x_new, g_new);
      if (!all_finite(f_new, g_new)) {
        continue;
      }
      if (f_new <= f + 1e-4 * t * slope) {
        return true;
      }
      if (f_new <= f + noise && g_new.cwiseAbs().maxCoeff() < g_max) {
        return true;
      }
    }
    return false;
  }

  LogLik loglik_;
  OptimizerOptions options_;
};

void require_events(double events) {
  if (!(events > 0.0)) {
    throw std::invalid_argument("cannot fit a model to a sample without events");
  }
}

void require_converged(const FitResult& f, std::size_t param_index) {
  if (!f.converged()) {
    throw std::invalid_argument("fit did not converge; parameters are not estimable");
  }
  if (param_index >= f.estimates.size() || param_index >= f.log_se.size()) {
    throw std::out_of_range(fmt::format("parameter index {} out of range", param_index));
  }
}

}  // namespace

FitResult fit_weibull(const EventTable& s, const OptimizerOptions& options) {
  require_events(s.event_count());
  auto loglik = [&s](std::span<const double> x, std::span<double> g) {
    return weibull_loglik_log_params(s, x, g);
  };
  // Null model start: shape 1, rate from the exponential MLE.
  Vec<2> x0(0.0, std::log(s.event_count() / s.total_time()));
  return Maximizer<2, decltype(loglik)>(loglik, options).run(Model::weibull, x0);
}

FitResult fit_weibull(const SurvivalSample& s, const OptimizerOptions& options) {
  require_events(static_cast<double>(s.event_count()));
  return fit_weibull(EventTable(s), options);
}

FitResult fit_pgw(const EventTable& s, const OptimizerOptions& options) {
  require_events(s.event_count());
  auto loglik = [&s](std::span<const double> x, std::span<double> g) {
    return pgw_loglik_log_params(s, x, g);
  };
  Vec<3> x0(0.0, 0.0, std::log(s.total_time() / s.event_count()));
  return Maximizer<3, decltype(loglik)>(loglik, options).run(Model::pgw, x0);
}

FitResult fit_pgw(const SurvivalSample& s, const OptimizerOptions& options) {
  require_events(static_cast<double>(s.event_count()));
  return fit_pgw(EventTable(s), options);
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument(fmt::format("significance level must lie in (0, 1), got {}", level));
  }
  const boost::math::normal_distribution<double> normal;
  return boost::math::quantile(boost::math::complement(normal, level / 2.0));
}

WaldInterval wald_interval(const FitResult& f, std::size_t param_index, double level) {
  require_converged(f, param_index);
  const double z = two_sided_z(level);
  const double log_point = std::log(f.estimates[param_index]);
  const double half = z * f.log_se[param_index];
  return {f.estimates[param_index], std::exp(log_point - half), std::exp(log_point + half), level};
}

double shape_pvalue(const FitResult& f, std::size_t param_index) {
  require_converged(f, param_index);
  const double log_point = std::log(f.estimates[param_index]);
  if (log_point == 0.0) {
    return 1.0;
  }
  const double z = std::abs(log_point) / f.log_se[param_index];
  return std::erfc(z / std::sqrt(2.0));
}

}  // namespace wsp
