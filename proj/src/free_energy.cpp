#include "hopfcone/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hopfcone/errors.hpp"
#include "hopfcone/parallel.hpp"
#include "hopfcone/rng.hpp"

namespace hopfcone {

namespace {

constexpr std::size_t kMaxNoiseTensor = 10'000'000;

// B[(i_1 j_1),…,(i_p j_p)] = Σ_l W_{i,l} A_{j,l}, with the pair index i_n·K + j_n,
// so that (x^{⊗p}A)·W = Σ_m B[m] Π_n vec(x)[m_n].
std::vector<double> noise_tensor(const InteractionSpec& spec, const Matrix& W, std::size_t N) {
  const std::size_t K = spec.K(), p = spec.p(), L = spec.L();
  const std::size_t M = N * K;
  const std::size_t total = checked_power(M, p, kMaxNoiseTensor);
  const std::size_t Np = W.rows(), Kp = spec.tensor_size();
  std::vector<double> B(total, 0.0);
  std::vector<std::size_t> id(p), jd(p);
  for (std::size_t i = 0; i < Np; ++i) {
    for (std::size_t n = p, r = i; n-- > 0; r /= N) id[n] = r % N;
    for (std::size_t j = 0; j < Kp; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < L; ++l) s += W(i, l) * spec.A()(j, l);
      if (s == 0.0) continue;
      for (std::size_t n = p, r = j; n-- > 0; r /= K) jd[n] = r % K;
      std::size_t m = 0;
      for (std::size_t n = 0; n < p; ++n) m = m * M + id[n] * K + jd[n];
      B[m] = s;
    }
  }
  return B;
}

// Σ_m B[m] Π_n v[m_n], contracting the last mode first.
double contract(const std::vector<double>& B, std::span<const double> v, std::vector<double>& buf_a,
                std::vector<double>& buf_b) {
  const std::size_t M = v.size();
  std::size_t len = B.size();
  const double* cur = B.data();
  std::vector<double>* out = &buf_a;
  while (len > 1) {
    const std::size_t rows = len / M;
    out->resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = cur + r * M;
      double s = 0.0;
      for (std::size_t k = 0; k < M; ++k) s += row[k] * v[k];
      (*out)[r] = s;
    }
    cur = out->data();
    len = rows;
    out = (out == &buf_a) ? &buf_b : &buf_a;
  }
  return cur[0];
}

double log_sum_exp(const std::vector<double>& e) {
  const double m = *std::max_element(e.begin(), e.end());
  double s = 0.0;
  for (double x : e) s += std::exp(x - m);
  return m + std::log(s);
}

void validate_point(const ConfigurationSpace& space, double t, const SymMatrix& h) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("free energy: t must be finite and nonnegative");
  if (h.dim() != space.K()) throw ValidationError("free energy: h has the wrong dimension");
  if (!is_psd(h, kPsdTolerance * (1.0 + h.norm()))) throw ValidationError("free energy: h is not PSD");
}

}  // namespace

StatEstimate mean_and_error(std::span<const double> samples) {
  StatEstimate out;
  const std::size_t n = samples.size();
  if (n == 0) return out;
  double s = 0.0;
  for (double x : samples) s += x;
  out.value = s / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - out.value) * (x - out.value);
    out.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

// ---------------------------------------------------- ConfigurationSpace

ConfigurationSpace::ConfigurationSpace(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N)
    : spec_(spec), prior_(prior), N_(N), count_(0) {
  if (N == 0) throw ValidationError("ConfigurationSpace: N must be positive");
  if (prior.dim() != spec.K()) throw ValidationError("ConfigurationSpace: prior dimension differs from K");
  count_ = checked_power(prior.size(), N, kMaxConfigurations);
  const std::size_t K = prior.dim();
  log_prior_.resize(count_);
  self_energy_.resize(count_);
  self_overlap_.resize(count_ * K * K);
  Matrix x(N, K);
  for (std::size_t c = 0; c < count_; ++c) {
    fill(c, x);
    double lp = 0.0;
    for (std::size_t i = 0, r = c; i < N; ++i, r /= prior.size()) lp += prior.log_weights()[r % prior.size()];
    log_prior_[c] = lp;
    const Matrix s = cross_gram(x, x);
    std::copy(s.data().begin(), s.data().end(), self_overlap_.begin() + c * K * K);
    self_energy_[c] = nonlinearity_H(spec, s);
  }
}

void ConfigurationSpace::fill(std::size_t c, Matrix& x) const {
  const std::size_t A = prior_.size(), K = prior_.dim();
  // Row N-1 is the least significant digit.
  for (std::size_t i = N_; i-- > 0; c /= A) {
    const auto& atom = prior_.atom(c % A);
    for (std::size_t k = 0; k < K; ++k) x(i, k) = atom[k];
  }
}

Matrix ConfigurationSpace::configuration(std::size_t c) const {
  Matrix x(N_, prior_.dim());
  fill(c, x);
  return x;
}

// -------------------------------------------------------- QuenchedSystem

QuenchedSystem::QuenchedSystem(std::shared_ptr<const ConfigurationSpace> space, Disorder disorder)
    : space_(std::move(space)), disorder_(std::move(disorder)) {
  const auto& sp = *space_;
  const std::size_t n = sp.size(), K = sp.K(), N = sp.N();
  if (disorder_.X.rows() != N || disorder_.X.cols() != K) throw ValidationError("QuenchedSystem: disorder shape mismatch");
  const auto B = noise_tensor(sp.spec(), disorder_.W, N);
  signal_.resize(n);
  noise_.resize(n);
  truth_overlap_.resize(n * K * K);
  noise_overlap_.resize(n * K * K);
  Matrix x(N, K);
  std::vector<double> buf_a, buf_b;
  for (std::size_t c = 0; c < n; ++c) {
    sp.fill(c, x);
    const Matrix o = cross_gram(x, disorder_.X);
    const Matrix u = cross_gram(x, disorder_.Z);
    std::copy(o.data().begin(), o.data().end(), truth_overlap_.begin() + c * K * K);
    std::copy(u.data().begin(), u.data().end(), noise_overlap_.begin() + c * K * K);
    signal_[c] = nonlinearity_H(sp.spec(), o);
    noise_[c] = contract(B, x.data(), buf_a, buf_b);
  }
}

void QuenchedSystem::energies(double t, const SymMatrix& h, std::vector<double>& out) const {
  const auto& sp = *space_;
  validate_point(sp, t, h);
  const std::size_t n = sp.size(), K = sp.K(), KK = K * K;
  const double scale = t / std::pow(static_cast<double>(sp.N()), static_cast<double>(sp.spec().p()) - 1.0);
  const double root_scale = std::sqrt(2.0 * scale);
  const Matrix hd = h.dense();
  const Matrix rd = sqrt_psd(2.0 * h).dense();
  out.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double* o = truth_overlap_.data() + c * KK;
    const double* u = noise_overlap_.data() + c * KK;
    const double* s = sp.self_overlap(c).data();
    double side = 0.0;
    for (std::size_t ab = 0; ab < KK; ++ab) {
      const double hab = hd.data()[ab];
      side += hab * (2.0 * o[ab] - s[ab]) + rd.data()[ab] * u[ab];
    }
    out[c] = sp.log_prior(c) + 2.0 * scale * signal_[c] + root_scale * noise_[c] - scale * sp.self_energy(c) + side;
  }
}

double QuenchedSystem::hamiltonian(std::size_t c, double t, const SymMatrix& h) const {
  std::vector<double> e;
  energies(t, h, e);
  return e.at(c) - space_->log_prior(c);
}

double QuenchedSystem::log_partition(double t, const SymMatrix& h) const {
  std::vector<double> e;
  energies(t, h, e);
  return log_sum_exp(e) / static_cast<double>(space_->N());
}

GibbsSummary QuenchedSystem::gibbs(double t, const SymMatrix& h) const {
  const auto& sp = *space_;
  std::vector<double> e;
  energies(t, h, e);
  const double lse = log_sum_exp(e);
  const std::size_t N = sp.N(), K = sp.K();
  const auto& spec = sp.spec();

  Matrix mean_x(N, K);
  Matrix x(N, K);
  Matrix mean_image;
  for (std::size_t c = 0; c < sp.size(); ++c) {
    const double w = std::exp(e[c] - lse);
    if (w == 0.0) continue;
    sp.fill(c, x);
    for (std::size_t i = 0; i < N * K; ++i) mean_x.data()[i] += w * x.data()[i];
    const Matrix image = tensor_image(spec, x);
    if (mean_image.rows() == 0) mean_image = Matrix(image.rows(), image.cols());
    for (std::size_t i = 0; i < image.data().size(); ++i) mean_image.data()[i] += w * image.data()[i];
  }
  GibbsSummary out;
  const double Np = std::pow(static_cast<double>(N), static_cast<double>(spec.p()));
  out.dt = frobenius_dot(mean_image, mean_image) / Np;
  out.grad = (1.0 / static_cast<double>(N)) * gram(mean_x);
  out.residual = out.dt - nonlinearity_H(spec, out.grad);
  return out;
}

// ------------------------------------------------------------ free functions

double log_partition(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                     const SymMatrix& h, const Disorder& d) {
  auto space = std::make_shared<const ConfigurationSpace>(spec, prior, N);
  return QuenchedSystem(space, d).log_partition(t, h);
}

GibbsSummary gibbs_derivatives(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                               const SymMatrix& h, const Disorder& d) {
  auto space = std::make_shared<const ConfigurationSpace>(spec, prior, N);
  return QuenchedSystem(space, d).gibbs(t, h);
}

void for_each_disorder(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, std::size_t n_disorder,
                       std::uint64_t seed, unsigned threads,
                       const std::function<void(std::size_t, const QuenchedSystem&)>& fn) {
  if (n_disorder == 0) throw ValidationError("n_disorder must be positive");
  auto space = std::make_shared<const ConfigurationSpace>(spec, prior, N);
  parallel_for(n_disorder, threads, [&](std::size_t i) {
    const QuenchedSystem system(space, draw_disorder(derive_seed(seed, i), N, spec, prior));
    fn(i, system);
  });
}

FreeEnergyEstimate mean_free_energy(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                                    const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed,
                                    unsigned threads) {
  std::vector<double> values(n_disorder);
  for_each_disorder(spec, prior, N, n_disorder, seed, threads,
                    [&](std::size_t i, const QuenchedSystem& s) { values[i] = s.log_partition(t, h); });
  const auto stat = mean_and_error(values);
  FreeEnergyEstimate out;
  out.value = stat.value;
  out.std_error = stat.std_error;
  out.n_disorder = n_disorder;
  out.seed = seed;
  out.N = N;
  out.t = t;
  out.h = h;
  return out;
}

namespace {

std::vector<GibbsSummary> gibbs_samples(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N,
                                        double t, const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed,
                                        unsigned threads) {
  std::vector<GibbsSummary> out(n_disorder);
  for_each_disorder(spec, prior, N, n_disorder, seed, threads,
                    [&](std::size_t i, const QuenchedSystem& s) { out[i] = s.gibbs(t, h); });
  return out;
}

}  // namespace

GibbsAverage mean_gibbs_derivatives(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                                    const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed,
                                    unsigned threads) {
  const auto samples = gibbs_samples(spec, prior, N, t, h, n_disorder, seed, threads);
  const std::size_t K = spec.K();
  GibbsAverage out{{}, SymMatrix(K), SymMatrix(K)};
  std::vector<double> buf(n_disorder);
  for (std::size_t i = 0; i < n_disorder; ++i) buf[i] = samples[i].dt;
  out.dt = mean_and_error(buf);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a; b < K; ++b) {
      for (std::size_t i = 0; i < n_disorder; ++i) buf[i] = samples[i].grad(a, b);
      const auto s = mean_and_error(buf);
      out.grad.set(a, b, s.value);
      out.grad_std_error.set(a, b, s.std_error);
    }
  return out;
}

StatEstimate hj_residual_N(const InteractionSpec& spec, const DiscretePrior& prior, std::size_t N, double t,
                           const SymMatrix& h, std::size_t n_disorder, std::uint64_t seed, unsigned threads) {
  const auto samples = gibbs_samples(spec, prior, N, t, h, n_disorder, seed, threads);
  const std::size_t K = spec.K();
  double mean_dt = 0.0;
  SymMatrix mean_grad(K);
  for (const auto& s : samples) {
    mean_dt += s.dt;
    mean_grad += s.grad;
  }
  const double n = static_cast<double>(n_disorder);
  mean_dt /= n;
  mean_grad *= 1.0 / n;
  // Linearise H around the mean gradient for the standard error.
  const SymMatrix dH = grad_H(spec, mean_grad);
  std::vector<double> influence(n_disorder);
  for (std::size_t i = 0; i < n_disorder; ++i) influence[i] = samples[i].dt - frobenius_dot(dH, samples[i].grad);
  StatEstimate out;
  out.value = mean_dt - nonlinearity_H(spec, mean_grad);
  out.std_error = mean_and_error(influence).std_error;
  return out;
}

}  // namespace hopfcone
