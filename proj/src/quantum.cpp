#include "spce/quantum.hpp"

#include <cmath>
#include <stdexcept>

#include "spce/quadrature.hpp"

namespace spce::quantum {

namespace {

void validate_smearing(const AngularSmearing& s) {
    if (!std::isfinite(s.center))
        throw std::invalid_argument("AngularSmearing: center must be finite");
    if (!(s.half_width >= 0.0) || !std::isfinite(s.half_width))
        throw std::invalid_argument("AngularSmearing: half_width must be >= 0 and finite");
    if (s.density == SmearingDensity::truncated_gaussian && s.half_width > 0.0 &&
        !(s.sigma > 0.0))
        throw std::invalid_argument("AngularSmearing: truncated gaussian needs sigma > 0");
}

void validate_state(const SeparableState& state) {
    if (state.components.empty())
        throw std::invalid_argument("SeparableState: no components");
    double total = 0.0;
    for (const auto& c : state.components) {
        if (!(c.weight > 0.0 && c.weight <= 1.0))
            throw std::invalid_argument("SeparableState: weights must be in (0, 1]");
        if (std::fabs(c.e_a) > 1.0 || std::fabs(c.e_b) > 1.0)
            throw std::invalid_argument("SeparableState: local expectations must be in [-1, 1]");
        total += c.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("SeparableState: weights must sum to 1");
}

}  // namespace

double singlet_correlation(AnalyzerSetting theta_a, AnalyzerSetting theta_b) {
    return -std::cos(theta_a.radians() - theta_b.radians());
}

JointOutcomeDistribution singlet_joint_probabilities(AnalyzerSetting theta_a,
                                                     AnalyzerSetting theta_b) {
    const double c = std::cos(theta_a.radians() - theta_b.radians());
    JointOutcomeDistribution d;
    d.p_pp = d.p_mm = 0.25 * (1.0 - c);
    d.p_pm = d.p_mp = 0.25 * (1.0 + c);
    return d;
}

std::vector<std::pair<double, double>> smearing_nodes(const AngularSmearing& smearing,
                                                      int n_nodes) {
    validate_smearing(smearing);
    if (n_nodes < 1) throw std::invalid_argument("smearing_nodes: need n_nodes >= 1");

    std::vector<std::pair<double, double>> out;
    if (smearing.half_width == 0.0) {
        out.emplace_back(smearing.center, 1.0);
        return out;
    }

    const QuadratureRule rule = gauss_legendre(n_nodes);
    out.reserve(rule.nodes.size());
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = smearing.center + smearing.half_width * rule.nodes[i];
        double w = rule.weights[i];
        if (smearing.density == SmearingDensity::truncated_gaussian) {
            const double d = theta - smearing.center;
            w *= std::exp(-0.5 * d * d / (smearing.sigma * smearing.sigma));
        }
        out.emplace_back(theta, w);
        total += w;
    }
    // Normalize so the density integrates to exactly 1 on its interval.
    for (auto& [theta, w] : out) w /= total;
    return out;
}

double smeared_correlation(const AngularSmearing& smear_a, const AngularSmearing& smear_b) {
    const auto nodes_a = smearing_nodes(smear_a);
    const auto nodes_b = smearing_nodes(smear_b);
    double acc = 0.0;
    for (const auto& [ta, wa] : nodes_a)
        for (const auto& [tb, wb] : nodes_b) acc += wa * wb * std::cos(ta - tb);
    return -acc;
}

double separable_correlation(const SeparableState& state) {
    validate_state(state);
    double acc = 0.0;
    for (const auto& c : state.components) acc += c.weight * c.e_a * c.e_b;
    return acc;
}

}  // namespace spce::quantum
