#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spce/hv_models.hpp"
#include "spce/rng.hpp"

namespace test_support {

inline std::filesystem::path make_temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "spce_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

/// Random mixed-ensemble model over settings {a, ap} x {b, bp}.
inline spce::hv::FactorizableModel random_factorizable(spce::RandomStream& rng) {
    spce::hv::FactorizableModel model;
    const int cells = 1 + static_cast<int>(rng.uniform() * 6.0);
    double total = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double w = 0.05 + rng.uniform();
        model.weights.push_back(w);
        total += w;
    }
    for (auto& w : model.weights) w /= total;
    for (const char* label : {"a", "ap"}) {
        auto& probs = model.p_a[label];
        for (int i = 0; i < cells; ++i) probs.push_back(rng.uniform());
    }
    for (const char* label : {"b", "bp"}) {
        auto& probs = model.p_b[label];
        for (int i = 0; i < cells; ++i) probs.push_back(rng.uniform());
    }
    return model;
}

/// Random predetermined-outcome model over settings {a, ap} x {b, bp}.
inline spce::hv::DeterministicSharedSpaceModel random_deterministic(spce::RandomStream& rng) {
    spce::hv::DeterministicSharedSpaceModel model;
    const int cells = 1 + static_cast<int>(rng.uniform() * 8.0);
    double total = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double w = 0.05 + rng.uniform();
        model.weights.push_back(w);
        total += w;
    }
    for (auto& w : model.weights) w /= total;
    for (const char* label : {"a", "ap"}) {
        auto& resp = model.response_a[label];
        for (int i = 0; i < cells; ++i) resp.push_back(rng.uniform() < 0.5 ? -1 : +1);
    }
    for (const char* label : {"b", "bp"}) {
        auto& resp = model.response_b[label];
        for (int i = 0; i < cells; ++i) resp.push_back(rng.uniform() < 0.5 ? -1 : +1);
    }
    return model;
}

/// Random stationary AR coefficients built from reflection coefficients in
/// (-0.9, 0.9) via the lattice-to-direct conversion, which is stationary by
/// construction.
inline std::vector<double> random_stationary_ar(spce::RandomStream& rng, int order) {
    std::vector<double> phi;
    for (int k = 1; k <= order; ++k) {
        const double kappa = rng.uniform(-0.9, 0.9);
        std::vector<double> next(static_cast<std::size_t>(k));
        for (int j = 0; j < k - 1; ++j)
            next[static_cast<std::size_t>(j)] =
                phi[static_cast<std::size_t>(j)] -
                kappa * phi[static_cast<std::size_t>(k - 2 - j)];
        next[static_cast<std::size_t>(k - 1)] = kappa;
        phi = std::move(next);
    }
    return phi;
}

}  // namespace test_support
