#pragma once

// JSON configuration files.
//
// Latent distributions ("type" selects the variant):
//   {"type": "point_mass_mixture", "atoms": [[0.6, 0.4], ...], "weights": [...]}
//   {"type": "sbm", "block_probs": [[0.5, 0.2], [0.2, 0.5]], "weights": [0.4, 0.6]}
//   {"type": "dirichlet", "concentration": [1, 1, 1]}
//   {"type": "uniform_box", "lower": [0, 0], "upper": [0.5, 0.5]}
//   {"type": "logit_normal_mixture", "means": [[0, 0]], "covariances": [[[1, 0], [0, 1]]],
//    "weights": [1], "scale": 0.7}                       (scale optional)
//   {"type": "degree_corrected", "directions": <point_mass_mixture or sbm>,
//    "theta": [0.5, 1.0]}
//
// Kernels:
//   {"type": "gaussian", "sigma": 0.5} | {"type": "inverse_multiquadric", "c": 1, "beta": 0.5}
//   | {"type": "energy", "q": 1}
//
// Test settings (all optional):
//   {"variant": "identity", "d": 2, "kernel": {...}, "B": 200, "alpha": 0.05,
//    "sparsity_a": 0.5, "sparsity_b": 0.5, "projection_floor": 1e-6}
//
// Power experiment:
//   {"family": {"type": "sbm_two_block", "within": 0.5, "between": 0.2,
//               "weights": [0.4, 0.6]}
//            | {"type": "uniform_scaling", "f_upper": 0.7071, "g_upper": 0.5774, "d": 2}
//            | {"type": "fixed_pair", "F": <dist>, "G": <dist>},
//    "sweep": [0, 0.02], "n": [100, 200], "m_ratio": 1, "replicates": 100,
//    "test": {...}, "oracle_arm": false, "seed": 1, "threads": 0}
//
// W comparison:
//   {"F": <dist>, "G": <dist>, "n": [100, 400], "m_ratio": 1, "replicates": 100,
//    "d": 2, "kernel": {...}, "seed": 1, "same_graph": false,
//    "surrogate_samples": 1000000}

#include <filesystem>

#include <json.hpp>

#include "rdpg/harness.hpp"
#include "rdpg/mmd.hpp"
#include "rdpg/model.hpp"
#include "rdpg/testing.hpp"

namespace rdpg {

LatentDistribution distribution_from_json(const nlohmann::json& j);
KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const KernelSpec& spec);
TestConfig test_config_from_json(const nlohmann::json& j);
nlohmann::json test_config_to_json(const TestConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& c);
WCompareConfig wcompare_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file; errors carry the path.
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace rdpg
