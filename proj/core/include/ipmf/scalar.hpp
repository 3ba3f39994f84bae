#pragma once

// Closed-form 1D engine: optimality coefficient, IMF/IPF scalar updates,
// contraction factors and the geometric-rate certificate for IPMF between
// N(mu0, sigma0^2) and N(mu1, sigma1^2).

#include "ipmf/gauss.hpp"

namespace ipmf::scalar {

struct ScalarProblem {
    double mu0 = 0.0;
    double sigma0 = 1.0;
    double mu1 = 0.0;
    double sigma1 = 1.0;
    double epsilon = 1.0;

    /// Throws InvalidArgumentError unless sigma0, sigma1, epsilon > 0.
    void validate() const;
};

/// Which endpoint currently carries its exact target marginal.
enum class Side {
    StartsAtP0, ///< x0 ~ N(mu0, sigma0^2), x1 ~ N(nu, s^2)
    StartsAtP1, ///< x0 ~ N(nu, s^2), x1 ~ N(mu1, sigma1^2)
};

/// 1D coupling parameterized by its free marginal (nu, s) and correlation rho.
struct ScalarIterate {
    double nu = 0.0;
    double s = 1.0;
    double rho = 0.0;
    Side side = Side::StartsAtP0;

    /// Throws InvalidArgumentError unless s > 0 and |rho| < 1.
    void validate() const;
};

struct ImfMode {
    enum class Kind { Continuous, Discrete };

    Kind kind = Kind::Discrete;
    double t = 0.5; ///< interior time of the single grid point (discrete only)

    static ImfMode continuous() { return {Kind::Continuous, 0.5}; }
    static ImfMode discrete(double t = 0.5) { return {Kind::Discrete, t}; }
    bool isContinuous() const { return kind == Kind::Continuous; }
};

/// How a continuous IMF update was evaluated.
enum class ContinuousPath {
    Formula,    ///< closed-form arctanh / arctan expression
    GridOracle, ///< fine-grid discrete Markovian composition
};

struct ParameterRanges {
    double sigma1Min = 0.0;
    double sigma1Max = 0.0;
    double sigma0Min = 0.0;
    double sigma0Max = 0.0;
    double chiMin = 0.0;
    double chiMax = 0.0;
};

/// Geometric rates for one problem instance and starting coupling:
///   |s_k^2 - sigma1^2| <= alpha^{2k} |s_0^2 - sigma1^2|
///   |nu_k - mu1|       <= alpha^k    |nu_0 - mu1|
///   |chi_k - 1/eps|    <= beta^{2k}  |chi_0 - 1/eps|
struct RateCertificate {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;   ///< IMF contraction factor at (sigma0Max, sigma1Max)
    double rhoStar = 0.0; ///< correlation of the static bridge solution
    ParameterRanges ranges;
    ScalarIterate start;  ///< iterate the bounds refer to (after the +-1 nudge, if any)
    double chi0 = 0.0;
};

/// Optimality coefficient rho / (sigma sigma' (1 - rho^2)). Requires |rho| < 1.
double xi(double rho, double sigma, double sigmaP);

/// Inverse of xi in rho; returns 0 at chi = 0.
double pInverse(double chi, double sigma, double sigmaP);

/// Correlation of the 1D static Schroedinger bridge between N(., sigma0^2) and N(., sigma1^2).
double rhoStar(double sigma0, double sigma1, double epsilon);

/// Endpoint correlation after reciprocal + Markovian projection on a single
/// interior time t. Accepts rho in [-1, 1].
double rhoNewDiscrete(double rho, double sigma, double sigmaP, double t, double epsilon);

/// Continuous-time IMF correlation update in closed form. Throws FormulaDomainError
/// when the result is not a finite value in (0, 1).
double rhoNewContinuousFormula(double rho, double sigma, double sigmaP, double epsilon);

/// Continuous-time IMF correlation update approximated by the discrete Markovian
/// projection on a uniform grid with `interior` interior points.
double rhoNewContinuousGrid(double rho, double sigma, double sigmaP, double epsilon, int interior);

/// Formula path with grid fallback; `path` (optional) receives the route used.
double rhoNewContinuous(double rho, double sigma, double sigmaP, double epsilon,
                        ContinuousPath* path = nullptr);

/// (time-0 std, time-1 std) of the coupling described by `iter`.
std::pair<double, double> endpointStds(const ScalarIterate& iter, const ScalarProblem& problem);

/// Optimality coefficient of the coupling described by `iter`.
double chiOf(const ScalarIterate& iter, const ScalarProblem& problem);

JointGaussian toJoint(const ScalarIterate& iter, const ScalarProblem& problem);

/// The static bridge solution, pinned at p0.
ScalarIterate solutionIterate(const ScalarProblem& problem);

ScalarIterate imfStepDiscrete(const ScalarIterate& iter, const ScalarProblem& problem, double t);
ScalarIterate imfStepContinuous(const ScalarIterate& iter, const ScalarProblem& problem,
                                ContinuousPath* path = nullptr);
ScalarIterate imfStep(const ScalarIterate& iter, const ScalarProblem& problem, const ImfMode& mode);

double gammaC(double sigma, double sigmaP, double epsilon);
double gammaD(double sigma, double sigmaP, double t, double epsilon);
double gammaFor(const ImfMode& mode, double sigma, double sigmaP, double epsilon);

/// Factor l < 1 with |chi_new - 1/eps| <= l |chi - 1/eps| after one IMF step.
double chiImprovementFactor(double rho, double rhoStar, double gamma);

/// Keeps the conditional of the pinned end given the free end and moves the free
/// end onto its target marginal; the roles of the two ends swap.
ScalarIterate ipfStep(const ScalarIterate& iter, const ScalarProblem& problem);

/// IMF, IPF onto p1, IMF, IPF onto p0. Input and output are pinned at p0.
ScalarIterate ipmfRound(const ScalarIterate& iter, const ScalarProblem& problem, const ImfMode& mode);

RateCertificate certificate(const ScalarProblem& problem, const ScalarIterate& init, const ImfMode& mode);

struct EnvelopeCheck {
    bool variance = true;
    bool mean = true;
    bool chi = true;

    bool ok() const { return variance && mean && chi; }
};

/// Compares the round-k iterate against the certified envelopes with an absolute slack.
EnvelopeCheck checkEnvelopes(const RateCertificate& cert, const ScalarProblem& problem,
                             const ScalarIterate& current, int round, double slack = 1e-9);

} // namespace ipmf::scalar
