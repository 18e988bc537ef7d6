#include "rdpg/config.hpp"

#include <fstream>

#include "rdpg/errors.hpp"

namespace rdpg {

using nlohmann::json;

namespace {

std::vector<double> vec(const json& j) { return j.get<std::vector<double>>(); }

Eigen::MatrixXd matrix(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw Error("ragged matrix in config");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

PointMassMixture point_masses(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "sbm") return sbm_to_latent(matrix(j.at("block_probs")), vec(j.at("weights")));
  if (type == "point_mass_mixture") {
    return PointMassMixture{matrix(j.at("atoms")), vec(j.at("weights"))};
  }
  throw Error("expected a point_mass_mixture or sbm, got '" + type + "'");
}

json distribution_json(const LatentDistribution& dist) {
  json j;
  j["type"] = variant_name(dist);
  if (const auto* p = std::get_if<PointMassMixture>(&dist)) {
    j["atoms"] = matrix_json(p->atoms);
    j["weights"] = p->weights;
  } else if (const auto* d = std::get_if<Dirichlet>(&dist)) {
    j["concentration"] = d->concentration;
  } else if (const auto* b = std::get_if<UniformBox>(&dist)) {
    j["lower"] = b->lower;
    j["upper"] = b->upper;
  } else if (const auto* l = std::get_if<LogitNormalMixture>(&dist)) {
    json means = json::array(), covs = json::array();
    for (const auto& mu : l->means) {
      means.push_back(std::vector<double>(mu.data(), mu.data() + mu.size()));
    }
    for (const auto& c : l->covariances) covs.push_back(matrix_json(c));
    j["means"] = means;
    j["covariances"] = covs;
    j["weights"] = l->weights;
    if (l->scale > 0.0) j["scale"] = l->scale;
  } else if (const auto* c = std::get_if<DegreeCorrected>(&dist)) {
    j["directions"] = distribution_json(c->directions);
    j["theta"] = {c->theta_min, c->theta_max};
  }
  return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

LatentDistribution distribution_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    LatentDistribution dist;
    if (type == "sbm" || type == "point_mass_mixture") {
      dist = point_masses(j);
    } else if (type == "dirichlet") {
      dist = Dirichlet{vec(j.at("concentration"))};
    } else if (type == "uniform_box") {
      dist = UniformBox{vec(j.at("lower")), vec(j.at("upper"))};
    } else if (type == "logit_normal_mixture") {
      LogitNormalMixture l;
      for (const auto& mu : j.at("means")) {
        const auto v = vec(mu);
        l.means.emplace_back(Eigen::Map<const Eigen::VectorXd>(
            v.data(), static_cast<Eigen::Index>(v.size())));
      }
      for (const auto& c : j.at("covariances")) l.covariances.push_back(matrix(c));
      l.weights = vec(j.at("weights"));
      l.scale = get_or(j, "scale", 0.0);
      dist = std::move(l);
    } else if (type == "degree_corrected") {
      const auto theta = vec(j.at("theta"));
      if (theta.size() != 2) throw Error("degree_corrected: theta must be [min, max]");
      dist = DegreeCorrected{point_masses(j.at("directions")), theta[0], theta[1]};
    } else {
      throw Error("unknown distribution type '" + type + "'");
    }
    validate(dist);
    return dist;
  } catch (const json::exception& e) {
    throw Error(std::string("distribution config: ") + e.what());
  }
}

KernelSpec kernel_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "gaussian") return KernelSpec::gaussian(j.at("sigma").get<double>());
    if (type == "inverse_multiquadric") {
      return KernelSpec::inverse_multiquadric(j.at("c").get<double>(),
                                              j.at("beta").get<double>());
    }
    if (type == "energy") return KernelSpec::energy(j.at("q").get<double>());
    throw Error("unknown kernel type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(std::string("kernel config: ") + e.what());
  }
}

json kernel_to_json(const KernelSpec& spec) {
  const auto& p = spec.params();
  if (const auto* g = std::get_if<KernelSpec::Gaussian>(&p)) {
    return {{"type", "gaussian"}, {"sigma", g->sigma}};
  }
  if (const auto* m = std::get_if<KernelSpec::InverseMultiquadric>(&p)) {
    return {{"type", "inverse_multiquadric"}, {"c", m->c}, {"beta", m->beta}};
  }
  return {{"type", "energy"}, {"q", std::get<KernelSpec::Energy>(p).q}};
}

TestConfig test_config_from_json(const json& j) {
  try {
    TestConfig c;
    c.variant = parse_variant(get_or<std::string>(j, "variant", "identity"));
    c.dimension = get_or(j, "d", c.dimension);
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
    c.permutations = get_or(j, "B", c.permutations);
    c.alpha_level = get_or(j, "alpha", c.alpha_level);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    if (j.contains("sparsity_a")) c.sparsity_a = j.at("sparsity_a").get<double>();
    if (j.contains("sparsity_b")) c.sparsity_b = j.at("sparsity_b").get<double>();
    c.projection_floor = get_or(j, "projection_floor", c.projection_floor);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("test config: ") + e.what());
  }
}

json test_config_to_json(const TestConfig& c) {
  json j{{"variant", to_string(c.variant)},
         {"d", c.dimension},
         {"kernel", kernel_to_json(c.kernel)},
         {"B", c.permutations},
         {"alpha", c.alpha_level},
         {"projection_floor", c.projection_floor}};
  if (c.sparsity_a) j["sparsity_a"] = *c.sparsity_a;
  if (c.sparsity_b) j["sparsity_b"] = *c.sparsity_b;
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  try {
    ExperimentConfig c;
    const json& fam = j.at("family");
    const std::string type = fam.at("type").get<std::string>();
    if (type == "sbm_two_block") {
      c.family.kind = ModelFamily::Kind::sbm_two_block;
      c.family.within = get_or(fam, "within", c.family.within);
      c.family.between = get_or(fam, "between", c.family.between);
      c.family.block_weights = get_or(fam, "weights", c.family.block_weights);
    } else if (type == "uniform_scaling") {
      c.family.kind = ModelFamily::Kind::uniform_scaling;
      c.family.f_upper = get_or(fam, "f_upper", c.family.f_upper);
      c.family.g_upper = get_or(fam, "g_upper", c.family.g_upper);
      c.family.box_dim = get_or(fam, "d", c.family.box_dim);
    } else if (type == "fixed_pair") {
      c.family.kind = ModelFamily::Kind::fixed_pair;
      c.family.f = distribution_from_json(fam.at("F"));
      c.family.g = distribution_from_json(fam.at("G"));
    } else {
      throw Error("unknown model family '" + type + "'");
    }
    c.sweep = get_or(j, "sweep", c.sweep);
    c.n_grid = get_or(j, "n", c.n_grid);
    c.m_ratio = get_or(j, "m_ratio", c.m_ratio);
    c.replicates = get_or(j, "replicates", c.replicates);
    if (j.contains("test")) c.test = test_config_from_json(j.at("test"));
    c.oracle_arm = get_or(j, "oracle_arm", c.oracle_arm);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.threads = get_or(j, "threads", c.threads);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("experiment config: ") + e.what());
  }
}

json experiment_to_json(const ExperimentConfig& c) {
  json fam;
  switch (c.family.kind) {
    case ModelFamily::Kind::sbm_two_block:
      fam = {{"type", "sbm_two_block"},
             {"within", c.family.within},
             {"between", c.family.between},
             {"weights", c.family.block_weights}};
      break;
    case ModelFamily::Kind::uniform_scaling:
      fam = {{"type", "uniform_scaling"},
             {"f_upper", c.family.f_upper},
             {"g_upper", c.family.g_upper},
             {"d", c.family.box_dim}};
      break;
    case ModelFamily::Kind::fixed_pair:
      fam = {{"type", "fixed_pair"},
             {"F", distribution_json(*c.family.f)},
             {"G", distribution_json(*c.family.g)}};
      break;
  }
  return {{"family", fam},       {"sweep", c.sweep},
          {"n", c.n_grid},       {"m_ratio", c.m_ratio},
          {"replicates", c.replicates}, {"test", test_config_to_json(c.test)},
          {"oracle_arm", c.oracle_arm}, {"seed", c.seed}};
}

WCompareConfig wcompare_from_json(const json& j) {
  try {
    WCompareConfig c{distribution_from_json(j.at("F")), distribution_from_json(j.at("G"))};
    c.n_grid = get_or(j, "n", c.n_grid);
    c.m_ratio = get_or(j, "m_ratio", c.m_ratio);
    c.replicates = get_or(j, "replicates", c.replicates);
    c.dimension = get_or(j, "d", c.dimension);
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.same_graph = get_or(j, "same_graph", c.same_graph);
    c.surrogate_samples = get_or<std::size_t>(j, "surrogate_samples", c.surrogate_samples);
    c.threads = get_or(j, "threads", c.threads);
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("w-compare config: ") + e.what());
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace rdpg
