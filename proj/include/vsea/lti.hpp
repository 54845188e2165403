#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Rational transfer-function and state-space arithmetic for SISO
// continuous-time systems, plus bilinear (Tustin) discretization.
// Everything is double precision; polynomial degrees in this project
// stay at or below 8.

namespace vsea::lti {

using Complex = std::complex<double>;

// Real polynomial with coefficients stored in ascending degree order.
// The canonical zero polynomial is the single coefficient {0}.
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> c) : coeffs_(c) { trim(); }
    explicit Polynomial(std::vector<double> c) : coeffs_(std::move(c)) { trim(); }

    static Polynomial zero() { return Polynomial{}; }
    static Polynomial one() { return Polynomial{1.0}; }
    // The monomial s.
    static Polynomial s() { return Polynomial{0.0, 1.0}; }
    static Polynomial from_roots(const std::vector<Complex>& roots, double leading = 1.0);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double coeff(int k) const { return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[k] : 0.0; }
    double leading() const { return coeffs_.back(); }
    double norm_inf() const;

    double eval(double x) const;
    Complex eval(Complex x) const;
    Polynomial derivative() const;

    // Divides all coefficients by the max-magnitude one (no-op for zero).
    Polynomial max_normalized() const;
    Polynomial monic() const;

    Polynomial operator-() const;
    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double k, const Polynomial& p);
    friend Polynomial operator*(const Polynomial& p, double k) { return k * p; }

    // Euclidean division: *this = q*d + r with deg(r) < deg(d).
    struct DivMod;
    DivMod divmod(const Polynomial& d) const;

    std::string str(const std::string& var = "s") const;

private:
    void trim();
    std::vector<double> coeffs_;
};

struct Polynomial::DivMod {
    Polynomial quotient;
    Polynomial remainder;
};

// One entry per common factor removed during rational arithmetic.
struct CancellationEvent {
    std::string op;      // which operation produced it
    int degree = 0;      // degree of the cancelled common factor
};
using CancellationLog = std::vector<CancellationEvent>;

// Rational transfer function num(s)/den(s), stored with a monic
// denominator. Common numerator/denominator factors are cancelled by
// the arithmetic helpers only when they match within `kCancelTol`
// relative tolerance, and every cancellation is reported through the
// optional log, never applied silently.
inline constexpr double kCancelTol = 1e-12;

class TransferFunction {
public:
    TransferFunction() : num_{0.0}, den_{1.0} {}
    TransferFunction(Polynomial num, Polynomial den);

    static TransferFunction constant(double k) { return {Polynomial{k}, Polynomial{1.0}}; }
    // k/s
    static TransferFunction integrator(double k = 1.0) { return {Polynomial{k}, Polynomial{0.0, 1.0}}; }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    int relative_degree() const { return den_.degree() - num_.degree(); }
    bool is_proper() const { return num_.degree() <= den_.degree(); }

    Complex eval(Complex s) const;
    double dc_gain() const { return num_.eval(0.0) / den_.eval(0.0); }

    std::string str() const { return "(" + num_.str() + ") / (" + den_.str() + ")"; }

private:
    Polynomial num_, den_;
};

TransferFunction tf_add(const TransferFunction& a, const TransferFunction& b,
                        CancellationLog* log = nullptr);
TransferFunction tf_sub(const TransferFunction& a, const TransferFunction& b,
                        CancellationLog* log = nullptr);
TransferFunction tf_mul(const TransferFunction& a, const TransferFunction& b,
                        CancellationLog* log = nullptr);
TransferFunction tf_div(const TransferFunction& a, const TransferFunction& b,
                        CancellationLog* log = nullptr);
// Negative feedback g/(1 + g*h). Throws if 1 + g*h is identically zero.
TransferFunction tf_feedback(const TransferFunction& g, const TransferFunction& h,
                             CancellationLog* log = nullptr);

// Cancels common num/den factors matching within rel_tol (approximate
// polynomial GCD). Returns the reduced function.
TransferFunction simplified(const TransferFunction& g, double rel_tol = kCancelTol,
                            CancellationLog* log = nullptr);

// All roots of the denominator, multiplicities repeated. Polynomials are
// max-coefficient normalized before the companion-matrix eigensolve.
std::vector<Complex> poles(const TransferFunction& g);
std::vector<Complex> zeros(const TransferFunction& g);
std::vector<Complex> roots(const Polynomial& p);

// g(j*omega) for each grid point, evaluated by Horner's rule. Evaluation
// within `pole_tol` of an imaginary-axis pole yields NaN for that point
// (flagged, not thrown).
std::vector<Complex> freq_response(const TransferFunction& g, std::span<const double> omegas,
                                   double pole_tol = 1e-9);

std::vector<double> log_grid(double omega_lo, double omega_hi, int points);

// Default analysis grid: 400 log-spaced points over 1e-1..1e4 rad/s.
std::vector<double> default_grid();

// SISO state-space model dx = A x + B u, y = C x + D u (per column of B /
// row of C when used as a MIMO container by the plant module).
struct StateSpaceModel {
    Eigen::MatrixXd A, B, C, D;

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }

    // Frequency response of the (output, input) channel.
    Complex eval(Complex s, int output = 0, int input = 0) const;

    // One RK4 step with u held constant (zero-order hold).
    Eigen::VectorXd rk4_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double h) const;
};

// Controllable-canonical realization of a proper transfer function.
StateSpaceModel to_state_space(const TransferFunction& g);

// Discrete filter in the shift variable z, monic denominator, stepped in
// direct form II transposed. Holds its own delay-line state.
class DiscreteFilter {
public:
    DiscreteFilter() = default;
    DiscreteFilter(std::vector<double> num_d, std::vector<double> den_d, double sample_period);

    double step(double u);
    void reset();

    const std::vector<double>& num_d() const { return b_; }
    const std::vector<double>& den_d() const { return a_; }
    double sample_period() const { return Ts_; }
    bool marginal() const { return marginal_; }
    void set_marginal(bool m) { marginal_ = m; }

    // Response at z = exp(j w Ts).
    Complex eval_at_omega(double omega) const;

private:
    std::vector<double> b_{1.0};   // ascending in z^-1 after construction (see .cpp)
    std::vector<double> a_{1.0};
    std::vector<double> w_;        // delay line
    double Ts_ = 1e-3;
    bool marginal_ = false;
};

// Bilinear (trapezoidal) substitution s <- (2/T)(z-1)/(z+1). Throws on an
// improper g; flags (but accepts) a discrete pole within 1e-12 of z = -1.
DiscreteFilter discretize_tustin(const TransferFunction& g, double sample_period);

}  // namespace vsea::lti
