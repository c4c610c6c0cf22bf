#pragma once

#include <utility>
#include <vector>

#include "spce/angles.hpp"

namespace spce::quantum {

/// Joint law of a pair of +/-1 outcomes.
struct JointOutcomeDistribution {
    double p_pp = 0.0;  // P(+1, +1)
    double p_pm = 0.0;  // P(+1, -1)
    double p_mp = 0.0;  // P(-1, +1)
    double p_mm = 0.0;  // P(-1, -1)

    double p(int a, int b) const {
        if (a == +1) return b == +1 ? p_pp : p_pm;
        return b == +1 ? p_mp : p_mm;
    }

    /// E[a*b] under this law.
    double expectation() const { return p_pp + p_mm - p_pm - p_mp; }
};

enum class SmearingDensity { uniform, truncated_gaussian };

/// An analyzer direction known only up to a small interval
/// [center - half_width, center + half_width], with a density on it.
struct AngularSmearing {
    double center = 0.0;       // radians
    double half_width = 0.0;   // radians, >= 0
    SmearingDensity density = SmearingDensity::uniform;
    double sigma = 0.0;        // radians, > 0 for truncated_gaussian
};

struct SeparableComponent {
    double weight;  // in (0, 1]
    double e_a;     // local A-side expectation, in [-1, 1]
    double e_b;     // local B-side expectation, in [-1, 1]
};

/// Convex mixture of product states, represented by the local expectations
/// of each component. Weights must sum to 1.
struct SeparableState {
    std::vector<SeparableComponent> components;
};

/// Singlet-state correlation of spin projections along two directions:
/// -cos(thetaA - thetaB). Symmetric in its arguments.
double singlet_correlation(AnalyzerSetting theta_a, AnalyzerSetting theta_b);

/// The unique two-outcome joint law with uniform marginals whose product
/// expectation equals singlet_correlation: p(a, b) = (1 - a*b*cos(dtheta))/4.
JointOutcomeDistribution singlet_joint_probabilities(AnalyzerSetting theta_a,
                                                     AnalyzerSetting theta_b);

/// Quadrature nodes and weights for a smearing density; weights sum to 1.
/// A zero half-width degenerates to a single node at the center.
std::vector<std::pair<double, double>> smearing_nodes(const AngularSmearing& smearing,
                                                      int n_nodes = 48);

/// Correlation predicted when both analyzer directions are smeared:
/// the double integral of -cos(theta1 - theta2) against the two densities,
/// evaluated by fixed-order Gauss-Legendre quadrature (absolute error well
/// below 1e-9 for these smooth integrands). Strictly above -1 whenever both
/// half-widths are positive.
double smeared_correlation(const AngularSmearing& smear_a, const AngularSmearing& smear_b);

/// Correlation of a separable state: sum of p_i * eA_i * eB_i.
double separable_correlation(const SeparableState& state);

}  // namespace spce::quantum
