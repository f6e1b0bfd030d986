#include "causalfs/sem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "causalfs/random.hpp"
#include "json.hpp"

namespace causalfs {

namespace {

constexpr int kMaxEnumFeatures = 20;
constexpr double kGridTol = 1e-9;

// Distinct sub-stream tags for the generator stages.
constexpr std::uint64_t kEdgeStream = 101;
constexpr std::uint64_t kParamStream = 102;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void SemConfig::validate() const {
    require(products >= 1, "SemConfig: products must be positive");
    require(features >= 1, "SemConfig: features must be positive");
    require(edge_prob_zx >= 0.0 && edge_prob_zx <= 1.0, "SemConfig: edge_prob_zx outside [0, 1]");
    require(edge_prob_zy >= 0.0 && edge_prob_zy <= 1.0, "SemConfig: edge_prob_zy outside [0, 1]");
    require(alpha >= 0.0 && alpha <= 1.0, "SemConfig: alpha outside [0, 1]");
    require(discount_step >= 0.0, "SemConfig: negative discount_step");
    require(noise_var >= 0.0, "SemConfig: negative noise_var");
    require(a_offdiag_min <= a_offdiag_max, "SemConfig: bad a_offdiag range");
    require(a_diag_margin_min > 0.0, "SemConfig: a_diag_margin_min must be positive");
    require(a_diag_margin_min <= a_diag_margin_max, "SemConfig: bad a_diag_margin range");
    require(b_min <= b_max, "SemConfig: bad b range");
    require(c_min <= c_max, "SemConfig: bad c range");
}

void LinearSem::validate() const {
    const int m = products();
    const int k = features();
    require(m >= 1 && k >= 1, "LinearSem: empty product or feature block");
    require(a.rows() == m && a.cols() == m, "LinearSem: a dimension mismatch");
    require(c.rows() == m && c.cols() == k, "LinearSem: c dimension mismatch");
    require(dag.node_count() == 2 * m + k, "LinearSem: dag size mismatch");
    require(alpha >= 0.0 && alpha <= 1.0, "LinearSem: alpha outside [0, 1]");
    require(discount_step >= 0.0, "LinearSem: negative discount_step");
    require(noise_var >= 0.0, "LinearSem: negative noise_var");
    for (int i = 0; i < k; ++i)
        require(p(i) >= 0.0 && p(i) <= 1.0, "LinearSem: feature frequency outside [0, 1]");

    for (int i = 0; i < m; ++i) {
        require(dag.node(x_node(i)).cls == NodeClass::Decision, "LinearSem: bad node order");
        require(dag.node(y_node(i)).cls == NodeClass::Target, "LinearSem: bad node order");
    }
    for (int i = 0; i < k; ++i)
        require(dag.node(z_node(i)).cls == NodeClass::External, "LinearSem: bad node order");
    for (const auto& [pnode, cnode] : dag.edges()) {
        const NodeClass pc = dag.node(pnode).cls;
        const NodeClass cc = dag.node(cnode).cls;
        const bool ok = (pc == NodeClass::Decision && cc == NodeClass::Target) ||
                        (pc == NodeClass::External && cc != NodeClass::External);
        require(ok, "LinearSem: unexpected edge type");
    }
    for (int n = 0; n < m; ++n)
        for (int i = 0; i < k; ++i)
            if (!dag.has_edge(z_node(i), y_node(n)))
                require(c(n, i) == 0.0, "LinearSem: nonzero effect without a feature edge");
}

CausalDag generate_network(const SemConfig& cfg) {
    cfg.validate();
    const int m = cfg.products;
    const int k = cfg.features;

    std::vector<Node> nodes;
    nodes.reserve(2 * m + k);
    for (int i = 0; i < m; ++i) nodes.push_back({NodeClass::Decision, "x" + std::to_string(i + 1)});
    for (int i = 0; i < m; ++i) nodes.push_back({NodeClass::Target, "y" + std::to_string(i + 1)});
    for (int i = 0; i < k; ++i) nodes.push_back({NodeClass::External, "z" + std::to_string(i + 1)});

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
        for (int n = 0; n < m; ++n) edges.emplace_back(i, m + n);

    Rng rng(derive_seed(cfg.seed, kEdgeStream));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < m; ++j)
            if (rng.bernoulli(cfg.edge_prob_zx)) edges.emplace_back(2 * m + i, j);
    for (int i = 0; i < k; ++i)
        for (int n = 0; n < m; ++n)
            if (rng.bernoulli(cfg.edge_prob_zy)) edges.emplace_back(2 * m + i, m + n);

    return CausalDag(std::move(nodes), std::move(edges));
}

LinearSem generate_sem(const CausalDag& dag, const SemConfig& cfg) {
    cfg.validate();
    const int m = cfg.products;
    const int k = cfg.features;
    require(dag.node_count() == 2 * m + k, "generate_sem: dag does not match config dimensions");

    LinearSem sem{dag, Eigen::VectorXd(k), Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd(m),
                  Eigen::MatrixXd::Zero(m, k), cfg.alpha, cfg.discount_step, cfg.noise_var};

    Rng rng(derive_seed(cfg.seed, kParamStream));
    for (int i = 0; i < k; ++i) sem.p(i) = rng.uniform01();
    for (int n = 0; n < m; ++n)
        for (int j = 0; j < m; ++j)
            if (j != n) sem.a(n, j) = rng.uniform(cfg.a_offdiag_min, cfg.a_offdiag_max);
    for (int n = 0; n < m; ++n) {
        double spread = 0.0;
        for (int j = 0; j < m; ++j)
            if (j != n) spread += std::abs(sem.a(n, j)) + std::abs(sem.a(j, n));
        sem.a(n, n) = -spread / 2.0 - rng.uniform(cfg.a_diag_margin_min, cfg.a_diag_margin_max);
    }
    for (int n = 0; n < m; ++n) sem.b(n) = rng.uniform(cfg.b_min, cfg.b_max);
    for (int n = 0; n < m; ++n)
        for (int i = 0; i < k; ++i)
            if (dag.has_edge(sem.z_node(i), sem.y_node(n)))
                sem.c(n, i) = rng.uniform(cfg.c_min, cfg.c_max);

    sem.validate();
    return sem;
}

namespace {

// z-parent feature indices per product, from the dag.
std::vector<std::vector<int>> discount_parents(const LinearSem& sem) {
    std::vector<std::vector<int>> out(sem.products());
    for (int m = 0; m < sem.products(); ++m)
        for (int par : sem.dag.parents(sem.x_node(m)))
            out[m].push_back(par - 2 * sem.products());
    return out;
}

}  // namespace

Dataset sample(const LinearSem& sem, int count, std::uint64_t seed) {
    sem.validate();
    require(count >= 1, "sample: count must be positive");
    const int m = sem.products();
    const int k = sem.features();
    const auto parents = discount_parents(sem);
    const double sd = std::sqrt(sem.noise_var);

    Dataset data;
    data.x.resize(count, m);
    data.y.resize(count, m);
    data.z.resize(count, k);

    Rng rng(seed);
    Eigen::VectorXd xrow(m), zrow(k), noise(m);
    for (int r = 0; r < count; ++r) {
        for (int i = 0; i < k; ++i) zrow(i) = rng.bernoulli(sem.p(i)) ? 1.0 : 0.0;
        for (int j = 0; j < m; ++j) {
            double active = 0.0;
            for (int par : parents[j]) active += zrow(par);
            const double extra = rng.bernoulli(sem.alpha) ? 1.0 : 0.0;
            xrow(j) = 1.0 - sem.discount_step * active - sem.discount_step * extra;
        }
        for (int j = 0; j < m; ++j) noise(j) = rng.normal(0.0, sd);
        data.x.row(r) = xrow;
        data.z.row(r) = zrow;
        data.y.row(r) = (sem.a * xrow + sem.b + sem.c * zrow + noise).transpose();
    }
    return data;
}

Eigen::VectorXd expected_y_do(const LinearSem& sem, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& z) {
    require(x.size() == sem.products(), "expected_y_do: x dimension mismatch");
    require(z.size() == sem.features(), "expected_y_do: z dimension mismatch");
    return sem.a * x + sem.b + sem.c * z;
}

Eigen::VectorXd expected_y_cond(const LinearSem& sem, const Eigen::VectorXd& x,
                                const std::vector<int>& kappa,
                                const Eigen::VectorXd& z_kappa) {
    sem.validate();
    const int m = sem.products();
    const int k = sem.features();
    require(x.size() == m, "expected_y_cond: x dimension mismatch");
    require(k <= kMaxEnumFeatures, "expected_y_cond: too many features for exact enumeration");
    require(static_cast<int>(kappa.size()) == z_kappa.size(),
            "expected_y_cond: kappa and z_kappa size mismatch");
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        require(kappa[i] >= 0 && kappa[i] < k, "expected_y_cond: kappa index out of range");
        if (i > 0) require(kappa[i] > kappa[i - 1], "expected_y_cond: kappa must be sorted unique");
    }

    const auto parents = discount_parents(sem);
    const Eigen::VectorXd ax = sem.a * x + sem.b;

    Eigen::VectorXd num = Eigen::VectorXd::Zero(m);
    double den = 0.0;
    std::vector<int> zs(k, 0);

    // Mixed-radix enumeration over all feature states, last index fastest.
    while (true) {
        bool consistent = true;
        for (std::size_t i = 0; i < kappa.size(); ++i) {
            if (std::abs(z_kappa(static_cast<int>(i)) - zs[kappa[i]]) > kGridTol) {
                consistent = false;
                break;
            }
        }
        if (consistent) {
            double w = 1.0;
            for (int i = 0; i < k; ++i) w *= zs[i] ? sem.p(i) : 1.0 - sem.p(i);
            for (int j = 0; j < m && w != 0.0; ++j) {
                double active = 0.0;
                for (int par : parents[j]) active += zs[par];
                const double base = 1.0 - sem.discount_step * active;
                double wj = 0.0;
                if (std::abs(x(j) - base) <= kGridTol) wj += 1.0 - sem.alpha;
                if (std::abs(x(j) - (base - sem.discount_step)) <= kGridTol) wj += sem.alpha;
                w *= wj;
            }
            if (w != 0.0) {
                for (int n = 0; n < m; ++n) {
                    double e = ax(n);
                    for (int i = 0; i < k; ++i)
                        if (zs[i]) e += sem.c(n, i);
                    num(n) += w * e;
                }
                den += w;
            }
        }
        int i = k - 1;
        while (i >= 0 && ++zs[i] > 1) zs[i--] = 0;
        if (i < 0) break;
    }

    if (den <= 0.0)
        throw std::runtime_error("expected_y_cond: conditioning event has zero probability");
    return num / den;
}

Eigen::MatrixXd sample_intervention(const LinearSem& sem, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& z, int count, std::uint64_t seed) {
    require(count >= 1, "sample_intervention: count must be positive");
    const Eigen::VectorXd mu = expected_y_do(sem, x, z);
    const double sd = std::sqrt(sem.noise_var);
    Eigen::MatrixXd out(count, sem.products());
    Rng rng(seed);
    for (int r = 0; r < count; ++r)
        for (int n = 0; n < sem.products(); ++n) out(r, n) = mu(n) + rng.normal(0.0, sd);
    return out;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, int nr, int nc, const char* what) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != nr)
        throw std::invalid_argument(std::string("sem_from_json: bad ") + what);
    Eigen::MatrixXd m(nr, nc);
    for (int r = 0; r < nr; ++r) {
        const auto& row = rows[r];
        if (!row.is_array() || static_cast<int>(row.size()) != nc)
            throw std::invalid_argument(std::string("sem_from_json: bad ") + what);
        for (int c = 0; c < nc; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

}  // namespace

std::string sem_to_json(const LinearSem& sem) {
    sem.validate();
    nlohmann::json j;
    j["products"] = sem.products();
    j["features"] = sem.features();
    j["alpha"] = sem.alpha;
    j["discount_step"] = sem.discount_step;
    j["noise_var"] = sem.noise_var;
    j["p"] = std::vector<double>(sem.p.data(), sem.p.data() + sem.p.size());
    j["a"] = matrix_to_json(sem.a);
    j["b"] = std::vector<double>(sem.b.data(), sem.b.data() + sem.b.size());
    j["c"] = matrix_to_json(sem.c);
    nlohmann::json zx = nlohmann::json::array();
    nlohmann::json zy = nlohmann::json::array();
    for (int i = 0; i < sem.features(); ++i) {
        for (int m = 0; m < sem.products(); ++m)
            if (sem.dag.has_edge(sem.z_node(i), sem.x_node(m))) zx.push_back({i, m});
        for (int n = 0; n < sem.products(); ++n)
            if (sem.dag.has_edge(sem.z_node(i), sem.y_node(n))) zy.push_back({i, n});
    }
    j["zx_edges"] = std::move(zx);
    j["zy_edges"] = std::move(zy);
    return j.dump(2);
}

LinearSem sem_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("sem_from_json: ") + e.what());
    }
    const int m = j.at("products").get<int>();
    const int k = j.at("features").get<int>();
    if (m < 1 || k < 1) throw std::invalid_argument("sem_from_json: bad dimensions");

    std::vector<Node> nodes;
    for (int i = 0; i < m; ++i) nodes.push_back({NodeClass::Decision, "x" + std::to_string(i + 1)});
    for (int i = 0; i < m; ++i) nodes.push_back({NodeClass::Target, "y" + std::to_string(i + 1)});
    for (int i = 0; i < k; ++i) nodes.push_back({NodeClass::External, "z" + std::to_string(i + 1)});
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
        for (int n = 0; n < m; ++n) edges.emplace_back(i, m + n);
    for (const auto& e : j.at("zx_edges"))
        edges.emplace_back(2 * m + e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto& e : j.at("zy_edges"))
        edges.emplace_back(2 * m + e.at(0).get<int>(), m + e.at(1).get<int>());

    const auto pvec = j.at("p").get<std::vector<double>>();
    const auto bvec = j.at("b").get<std::vector<double>>();
    if (static_cast<int>(pvec.size()) != k || static_cast<int>(bvec.size()) != m)
        throw std::invalid_argument("sem_from_json: vector size mismatch");

    LinearSem sem{CausalDag(std::move(nodes), std::move(edges)),
                  Eigen::Map<const Eigen::VectorXd>(pvec.data(), k),
                  matrix_from_json(j.at("a"), m, m, "a"),
                  Eigen::Map<const Eigen::VectorXd>(bvec.data(), m),
                  matrix_from_json(j.at("c"), m, k, "c"),
                  j.at("alpha").get<double>(),
                  j.at("discount_step").get<double>(),
                  j.at("noise_var").get<double>()};
    sem.validate();
    return sem;
}

LinearSem load_sem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open sem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sem_from_json(buf.str());
}

void save_sem_file(const std::string& path, const LinearSem& sem) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write sem file '" + path + "'");
    out << sem_to_json(sem) << '\n';
}

}  // namespace causalfs
