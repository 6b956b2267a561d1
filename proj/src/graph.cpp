#include "ongraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ongraph/errors.hpp"
#include "ongraph/rng.hpp"

namespace ongraph {

std::string ValidationReport::describe() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        switch (v.kind) {
            case GsoViolation::Kind::Asymmetry:
                os << "asymmetry at (" << v.i << "," << v.j << ")\n";
                break;
            case GsoViolation::Kind::NegativeEntry:
                os << "negative entry at (" << v.i << "," << v.j << ")\n";
                break;
            case GsoViolation::Kind::NonzeroDiagonal:
                os << "nonzero diagonal at (" << v.i << "," << v.j << ")\n";
                break;
        }
    }
    return os.str();
}

ValidationReport validate_gso(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("validate_gso: matrix not square");
    ValidationReport report;
    for (int i = 0; i < m.rows(); ++i) {
        if (m(i, i) != 0.0)
            report.violations.push_back({GsoViolation::Kind::NonzeroDiagonal, i, i});
        for (int j = 0; j < m.cols(); ++j) {
            if (m(i, j) < 0.0)
                report.violations.push_back({GsoViolation::Kind::NegativeEntry, i, j});
            if (j > i && m(i, j) != m(j, i))
                report.violations.push_back({GsoViolation::Kind::Asymmetry, i, j});
        }
    }
    return report;
}

Gso Gso::from_matrix(Matrix entries) {
    const ValidationReport report = validate_gso(entries);
    if (!report.ok()) throw NumericError("invalid GSO:\n" + report.describe());
    return Gso(std::move(entries));
}

int Gso::edge_count() const {
    int count = 0;
    for (int i = 0; i < n(); ++i)
        for (int j = i + 1; j < n(); ++j)
            if (entries_(i, j) != 0.0) ++count;
    return count;
}

Gso generate_er(int n, double p, std::uint64_t seed) {
    if (n < 2) throw DimensionError("generate_er: need at least 2 nodes");
    if (p < 0.0 || p > 1.0) throw ConfigError("generate_er: edge probability outside [0,1]");
    Rng rng(seed);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) {
                m(i, j) = 1.0;
                m(j, i) = 1.0;
            }
    return Gso::from_matrix(std::move(m));
}

NodePartition partition_uniform(int n, int h, std::uint64_t seed) {
    if (n < 2) throw DimensionError("partition_uniform: need at least 2 nodes");
    if (h < 0 || 2 * h >= n)
        throw ConfigError("partition_uniform: hidden count must satisfy h < n/2");
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    // Partial Fisher-Yates: the first h slots become the hidden set.
    for (int k = 0; k < h; ++k) {
        const auto j = k + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - k)));
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
    }
    NodePartition part;
    part.hidden.assign(idx.begin(), idx.begin() + h);
    part.observed.assign(idx.begin() + h, idx.end());
    std::sort(part.hidden.begin(), part.hidden.end());
    std::sort(part.observed.begin(), part.observed.end());
    return part;
}

GroundTruthScene extract_blocks(const Gso& full, const NodePartition& part) {
    if (part.n() != full.n())
        throw ConfigError("extract_blocks: partition size differs from graph size");
    std::vector<char> seen(static_cast<std::size_t>(full.n()), 0);
    for (const auto& group : {part.observed, part.hidden})
        for (int v : group) {
            if (v < 0 || v >= full.n()) throw ConfigError("extract_blocks: index out of range");
            if (seen[static_cast<std::size_t>(v)]++)
                throw ConfigError("extract_blocks: duplicate index in partition");
        }

    const int o = part.o();
    const int h = part.h();
    GroundTruthScene scene{full, part, Matrix(o, o), Matrix(o, h), Matrix(h, o), Matrix(h, h)};
    for (int a = 0; a < o; ++a) {
        for (int b = 0; b < o; ++b) scene.s_o(a, b) = full(part.observed[a], part.observed[b]);
        for (int b = 0; b < h; ++b) scene.s_oh(a, b) = full(part.observed[a], part.hidden[b]);
    }
    for (int a = 0; a < h; ++a) {
        for (int b = 0; b < o; ++b) scene.s_ho(a, b) = full(part.hidden[a], part.observed[b]);
        for (int b = 0; b < h; ++b) scene.s_h(a, b) = full(part.hidden[a], part.hidden[b]);
    }
    return scene;
}

Matrix reassemble(const GroundTruthScene& scene) {
    const int o = scene.partition.o();
    const int n = scene.partition.n();
    Matrix m(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double v = a < o ? (b < o ? scene.s_o(a, b) : scene.s_oh(a, b - o))
                                   : (b < o ? scene.s_ho(a - o, b) : scene.s_h(a - o, b - o));
            m(a, b) = v;
        }
    return m;
}

KnownEdgeSet::KnownEdgeSet(int n, std::vector<KnownEdge> edges)
    : n_(n), edges_(std::move(edges)), mask_(n, n), values_(n, n) {
    for (const auto& e : edges_) {
        if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
            throw ConfigError("KnownEdgeSet: index out of range");
        if (e.i >= e.j) throw ConfigError("KnownEdgeSet: pairs must satisfy i < j");
        mask_(e.i, e.j) = 1.0;
        mask_(e.j, e.i) = 1.0;
        values_(e.i, e.j) = e.value;
        values_(e.j, e.i) = e.value;
    }
}

KnownEdgeSet KnownEdgeSet::sample_from(const Matrix& s_true, double fraction, std::uint64_t seed) {
    if (s_true.rows() != s_true.cols()) throw DimensionError("sample_from: matrix not square");
    if (fraction < 0.0 || fraction > 1.0) throw ConfigError("sample_from: fraction outside [0,1]");
    const int n = s_true.rows();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    const auto total = static_cast<std::int64_t>(pairs.size());
    const auto want = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(total))));
    Rng rng(seed);
    for (std::int64_t k = 0; k < want; ++k) {
        const auto j =
            k + static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(total - k)));
        std::swap(pairs[static_cast<std::size_t>(k)], pairs[static_cast<std::size_t>(j)]);
    }
    std::vector<KnownEdge> edges;
    edges.reserve(static_cast<std::size_t>(want));
    for (std::int64_t k = 0; k < want; ++k) {
        const auto [i, j] = pairs[static_cast<std::size_t>(k)];
        edges.push_back({i, j, s_true(i, j)});
    }
    std::sort(edges.begin(), edges.end(), [](const KnownEdge& a, const KnownEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return KnownEdgeSet(n, std::move(edges));
}

void save_edge_list(const Gso& g, std::ostream& os) {
    os << "n=" << g.n() << "\n";
    char buf[64];
    for (int i = 0; i < g.n(); ++i)
        for (int j = i + 1; j < g.n(); ++j)
            if (g(i, j) != 0.0) {
                std::snprintf(buf, sizeof(buf), "%.17g", g(i, j));
                os << i << " " << j << " " << buf << "\n";
            }
}

void save_edge_list(const Gso& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    save_edge_list(g, os);
    if (!os) throw IoError("write failed: " + path);
}

Gso load_edge_list(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("n=", 0) != 0)
        throw IngestError("edge list: missing 'n=<N>' header");
    int n = 0;
    try {
        n = std::stoi(header.substr(2));
    } catch (const std::exception&) {
        throw IngestError("edge list: malformed node count in header");
    }
    if (n < 2) throw IngestError("edge list: node count must be at least 2");
    Matrix m(n, n);
    std::string line;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int i, j;
        double w;
        if (!(ls >> i >> j >> w))
            throw IngestError("edge list: malformed triple at line " + std::to_string(lineno));
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw IngestError("edge list: index out of range at line " + std::to_string(lineno));
        m(i, j) = w;
        m(j, i) = w;
    }
    return Gso::from_matrix(std::move(m));
}

Gso load_edge_list(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path);
    return load_edge_list(is);
}

}  // namespace ongraph
