#include "vsea/lti.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace vsea::lti {

namespace {

// Coefficients of exact zero are trimmed; anything else is kept so that
// near-cancellations stay visible to the GCD logic.
constexpr double kTrimEps = 0.0;

bool nearly_zero_poly(const Polynomial& p, double rel_tol, double scale) {
    for (double c : p.coeffs()) {
        if (std::abs(c) > rel_tol * scale) return false;
    }
    return true;
}

}  // namespace

void Polynomial::trim() {
    if (coeffs_.empty()) coeffs_ = {0.0};
    while (coeffs_.size() > 1 && std::abs(coeffs_.back()) <= kTrimEps) coeffs_.pop_back();
}

Polynomial Polynomial::from_roots(const std::vector<Complex>& rts, double leading) {
    // Multiply complex linear factors; imaginary residue is dropped at the
    // end, so conjugate pairs must be passed together.
    std::vector<Complex> c{1.0};
    for (const Complex& r : rts) {
        std::vector<Complex> next(c.size() + 1, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] -= r * c[i];
            next[i + 1] += c[i];
        }
        c = std::move(next);
    }
    std::vector<double> real(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) real[i] = leading * c[i].real();
    return Polynomial(std::move(real));
}

double Polynomial::norm_inf() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

double Polynomial::eval(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Complex Polynomial::eval(Complex x) const {
    Complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (degree() == 0) return zero();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::max_normalized() const {
    double m = norm_inf();
    if (m == 0.0) return *this;
    std::vector<double> c = coeffs_;
    for (double& v : c) v /= m;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::monic() const {
    if (is_zero()) throw std::invalid_argument("monic(): zero polynomial");
    std::vector<double> c = coeffs_;
    double lead = c.back();
    for (double& v : c) v /= lead;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-() const {
    std::vector<double> c = coeffs_;
    for (double& v : c) v = -v;
    return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
    for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return Polynomial::zero();
    std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
}

Polynomial operator*(double k, const Polynomial& p) {
    std::vector<double> c = p.coeffs_;
    for (double& v : c) v *= k;
    return Polynomial(std::move(c));
}

Polynomial::DivMod Polynomial::divmod(const Polynomial& d) const {
    if (d.is_zero()) throw std::invalid_argument("divmod(): division by zero polynomial");
    std::vector<double> r = coeffs_;
    int dn = d.degree();
    int qn = degree() - dn;
    if (qn < 0) return {Polynomial::zero(), *this};
    std::vector<double> q(static_cast<std::size_t>(qn) + 1, 0.0);
    double lead = d.coeffs_.back();
    for (int k = qn; k >= 0; --k) {
        double factor = r[static_cast<std::size_t>(k + dn)] / lead;
        q[static_cast<std::size_t>(k)] = factor;
        for (int i = 0; i <= dn; ++i)
            r[static_cast<std::size_t>(k + i)] -= factor * d.coeffs_[static_cast<std::size_t>(i)];
    }
    r.resize(static_cast<std::size_t>(std::max(dn, 1)));
    return {Polynomial(std::move(q)), Polynomial(std::move(r))};
}

std::string Polynomial::str(const std::string& var) const {
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
        double c = coeff(k);
        if (c == 0.0 && degree() > 0) continue;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        double m = std::abs(c);
        if (k == 0 || m != 1.0) os << m;
        if (k >= 1) {
            if (m != 1.0) os << "*";
            os << var;
            if (k > 1) os << "^" << k;
        }
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

// ---------------------------------------------------------------------------

TransferFunction::TransferFunction(Polynomial num, Polynomial den) {
    if (den.is_zero()) throw std::invalid_argument("TransferFunction: zero denominator");
    double lead = den.leading();
    num_ = (1.0 / lead) * num;
    den_ = (1.0 / lead) * den;
    if (num_.is_zero()) den_ = Polynomial::one();
}

Complex TransferFunction::eval(Complex s) const { return num_.eval(s) / den_.eval(s); }

namespace {

// Approximate monic GCD via the Euclidean algorithm with max-norm
// renormalization at every step. A remainder below rel_tol (relative to
// the normalized operands) counts as zero; that is the only place a
// common factor is allowed to cancel.
Polynomial approx_gcd(Polynomial a, Polynomial b, double rel_tol) {
    a = a.max_normalized();
    b = b.max_normalized();
    if (a.degree() < b.degree()) std::swap(a, b);
    while (b.degree() > 0) {
        Polynomial r = a.divmod(b).remainder;
        if (r.norm_inf() <= rel_tol) return b.monic();
        a = b;
        b = r.max_normalized();
    }
    return Polynomial::one();
}

TransferFunction reduce(Polynomial num, Polynomial den, double rel_tol, const char* op,
                        CancellationLog* log) {
    if (num.is_zero()) return {Polynomial::zero(), Polynomial::one()};
    Polynomial g = approx_gcd(num, den, rel_tol);
    if (g.degree() > 0) {
        num = num.divmod(g).quotient;
        den = den.divmod(g).quotient;
        if (log) log->push_back({op, g.degree()});
    }
    return {std::move(num), std::move(den)};
}

}  // namespace

TransferFunction tf_add(const TransferFunction& a, const TransferFunction& b, CancellationLog* log) {
    return reduce(a.num() * b.den() + b.num() * a.den(), a.den() * b.den(), kCancelTol, "tf_add", log);
}

TransferFunction tf_sub(const TransferFunction& a, const TransferFunction& b, CancellationLog* log) {
    return reduce(a.num() * b.den() - b.num() * a.den(), a.den() * b.den(), kCancelTol, "tf_sub", log);
}

TransferFunction tf_mul(const TransferFunction& a, const TransferFunction& b, CancellationLog* log) {
    return reduce(a.num() * b.num(), a.den() * b.den(), kCancelTol, "tf_mul", log);
}

TransferFunction tf_div(const TransferFunction& a, const TransferFunction& b, CancellationLog* log) {
    if (b.num().is_zero()) throw std::invalid_argument("tf_div: division by the zero transfer function");
    return reduce(a.num() * b.den(), a.den() * b.num(), kCancelTol, "tf_div", log);
}

TransferFunction tf_feedback(const TransferFunction& g, const TransferFunction& h, CancellationLog* log) {
    Polynomial num = g.num() * h.den();
    Polynomial den = g.den() * h.den() + g.num() * h.num();
    double scale = std::max(g.den().norm_inf() * h.den().norm_inf(),
                            g.num().norm_inf() * h.num().norm_inf());
    if (nearly_zero_poly(den, kCancelTol, scale))
        throw std::domain_error("tf_feedback: algebraic loop, 1 + g*h is identically zero");
    return reduce(std::move(num), std::move(den), kCancelTol, "tf_feedback", log);
}

TransferFunction simplified(const TransferFunction& g, double rel_tol, CancellationLog* log) {
    return reduce(g.num(), g.den(), rel_tol, "simplified", log);
}

std::vector<Complex> roots(const Polynomial& p_in) {
    Polynomial p = p_in.max_normalized();
    int n = p.degree();
    if (n <= 0) return {};
    if (n == 1) return {Complex{-p.coeff(0) / p.coeff(1), 0.0}};

    // Companion matrix of the monic polynomial.
    Polynomial m = p.monic();
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -m.coeff(i);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("roots(): companion-matrix eigensolver did not converge");

    std::vector<Complex> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);

    // Residual check against the backward-error bound for each root.
    for (const Complex& r : out) {
        double bound = 1e-8 * p.norm_inf() * std::pow(std::max(1.0, std::abs(r)), n);
        double res = std::abs(p.eval(r));
        if (!(res <= bound))
            throw std::runtime_error("roots(): residual " + std::to_string(res) +
                                     " exceeds tolerance for root magnitude " +
                                     std::to_string(std::abs(r)));
    }
    std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

std::vector<Complex> poles(const TransferFunction& g) {
    if (g.den().degree() < 1) return {};
    return roots(g.den());
}

std::vector<Complex> zeros(const TransferFunction& g) { return roots(g.num()); }

std::vector<Complex> freq_response(const TransferFunction& g, std::span<const double> omegas,
                                   double pole_tol) {
    std::vector<Complex> out;
    out.reserve(omegas.size());
    double den_scale = g.den().norm_inf();
    for (double w : omegas) {
        Complex s{0.0, w};
        Complex d = g.den().eval(s);
        int n = g.den().degree();
        double bound = pole_tol * den_scale * std::pow(std::max(1.0, std::abs(s)), n);
        if (std::abs(d) <= bound) {
            out.push_back(Complex{std::nan(""), std::nan("")});  // at a pole: flag, skip
            continue;
        }
        out.push_back(g.num().eval(s) / d);
    }
    return out;
}

std::vector<double> log_grid(double omega_lo, double omega_hi, int points) {
    if (points < 2 || omega_lo <= 0.0 || omega_hi <= omega_lo)
        throw std::invalid_argument("log_grid: need omega_hi > omega_lo > 0 and >= 2 points");
    std::vector<double> g(static_cast<std::size_t>(points));
    double llo = std::log10(omega_lo), lhi = std::log10(omega_hi);
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = std::pow(10.0, llo + (lhi - llo) * i / (points - 1));
    return g;
}

std::vector<double> default_grid() { return log_grid(1e-1, 1e4, 400); }

// ---------------------------------------------------------------------------

Complex StateSpaceModel::eval(Complex s, int output, int input) const {
    int n = order();
    Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
    Eigen::VectorXcd x = M.partialPivLu().solve(B.col(input).cast<Complex>());
    Complex y = (C.row(output).cast<Complex>() * x)(0, 0);
    return y + Complex{D(output, input), 0.0};
}

Eigen::VectorXd StateSpaceModel::rk4_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                          double h) const {
    auto f = [&](const Eigen::VectorXd& xi) -> Eigen::VectorXd { return A * xi + B * u; };
    Eigen::VectorXd k1 = f(x);
    Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
    Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
    Eigen::VectorXd k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StateSpaceModel to_state_space(const TransferFunction& g) {
    if (!g.is_proper()) throw std::invalid_argument("to_state_space: improper transfer function");
    int n = g.den().degree();
    // den is already monic by TransferFunction's canonical form.
    double d_feed = (g.num().degree() == n) ? g.num().coeff(n) : 0.0;
    Polynomial rem = g.num() - d_feed * g.den();

    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Zero(n, n);
    m.B = Eigen::MatrixXd::Zero(n, 1);
    m.C = Eigen::MatrixXd::Zero(1, n);
    m.D = Eigen::MatrixXd::Constant(1, 1, d_feed);
    if (n == 0) return m;
    for (int i = 0; i + 1 < n; ++i) m.A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) m.A(n - 1, i) = -g.den().coeff(i);
    m.B(n - 1, 0) = 1.0;
    for (int i = 0; i < n; ++i) m.C(0, i) = rem.coeff(i);
    return m;
}

// ---------------------------------------------------------------------------

DiscreteFilter::DiscreteFilter(std::vector<double> num_d, std::vector<double> den_d,
                               double sample_period)
    : Ts_(sample_period) {
    if (den_d.empty() || den_d.front() == 0.0)
        throw std::invalid_argument("DiscreteFilter: leading denominator coefficient must be nonzero");
    if (num_d.size() > den_d.size())
        throw std::invalid_argument("DiscreteFilter: order(num) must not exceed order(den)");
    double a0 = den_d.front();
    a_ = std::move(den_d);
    for (double& v : a_) v /= a0;
    b_.assign(a_.size(), 0.0);
    for (std::size_t i = 0; i < num_d.size(); ++i) b_[i] = num_d[i] / a0;
    w_.assign(a_.size() - 1, 0.0);
}

void DiscreteFilter::reset() { std::fill(w_.begin(), w_.end(), 0.0); }

double DiscreteFilter::step(double u) {
    // Direct form II transposed.
    double y = b_[0] * u + (w_.empty() ? 0.0 : w_[0]);
    for (std::size_t i = 0; i + 1 < w_.size(); ++i) w_[i] = b_[i + 1] * u + w_[i + 1] - a_[i + 1] * y;
    if (!w_.empty()) w_.back() = b_.back() * u - a_.back() * y;
    return y;
}

Complex DiscreteFilter::eval_at_omega(double omega) const {
    // b_, a_ are stored highest-power-of-z first (z^0 ... z^-k order), so
    // evaluate in z^-1.
    Complex zinv = std::exp(Complex{0.0, -omega * Ts_});
    Complex num = 0.0, den = 0.0, p = 1.0;
    for (std::size_t i = 0; i < b_.size(); ++i) {
        num += b_[i] * p;
        den += a_[i] * p;
        p *= zinv;
    }
    return num / den;
}

DiscreteFilter discretize_tustin(const TransferFunction& g, double sample_period) {
    if (sample_period <= 0.0) throw std::invalid_argument("discretize_tustin: sample_period must be > 0");
    if (!g.is_proper()) throw std::invalid_argument("discretize_tustin: improper transfer function");

    int n = g.den().degree();
    double c = 2.0 / sample_period;

    // s^k -> c^k (z-1)^k (z+1)^(n-k); accumulate numerator and denominator
    // in ascending powers of z, then flip to powers of z^-1.
    auto substitute = [&](const Polynomial& p) {
        std::vector<double> acc(static_cast<std::size_t>(n) + 1, 0.0);
        for (int k = 0; k <= n; ++k) {
            double pk = p.coeff(k);
            if (pk == 0.0) continue;
            // (z-1)^k * (z+1)^(n-k)
            std::vector<double> term{1.0};
            auto mul_lin = [&term](double c0) {  // multiply by (z + c0)
                std::vector<double> next(term.size() + 1, 0.0);
                for (std::size_t i = 0; i < term.size(); ++i) {
                    next[i] += c0 * term[i];
                    next[i + 1] += term[i];
                }
                term = std::move(next);
            };
            for (int i = 0; i < k; ++i) mul_lin(-1.0);
            for (int i = 0; i < n - k; ++i) mul_lin(1.0);
            double scale = pk * std::pow(c, k);
            for (std::size_t i = 0; i < term.size(); ++i) acc[i] += scale * term[i];
        }
        return acc;  // ascending powers of z, degree n
    };

    std::vector<double> num_z = substitute(g.num());
    std::vector<double> den_z = substitute(g.den());

    // Descending powers of z == ascending powers of z^-1.
    std::reverse(num_z.begin(), num_z.end());
    std::reverse(den_z.begin(), den_z.end());

    DiscreteFilter f(num_z, den_z, sample_period);

    // Marginal warning: discrete pole at z = -1 maps back to s = infinity.
    double at_m1 = 0.0, scale = 0.0, p = 1.0;
    for (std::size_t i = 0; i < den_z.size(); ++i) {
        at_m1 += den_z[i] * p;
        scale = std::max(scale, std::abs(den_z[i]));
        p = -p;
    }
    if (std::abs(at_m1) <= 1e-12 * scale) f.set_marginal(true);
    return f;
}

}  // namespace vsea::lti
