#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ongraph/matrix.hpp"

namespace ongraph {

struct GsoViolation {
    enum class Kind { Asymmetry, NegativeEntry, NonzeroDiagonal };
    Kind kind;
    int i, j;
};

struct ValidationReport {
    std::vector<GsoViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string describe() const;
};

// Checks symmetry, nonnegativity and a hollow diagonal. Throws
// DimensionError for non-square input.
ValidationReport validate_gso(const Matrix& m);

// Symmetric, nonnegative, hollow-diagonal adjacency block. Immutable after
// construction.
class Gso {
public:
    Gso() = default;  // empty graph
    static Gso from_matrix(Matrix entries);  // throws NumericError on violations

    int n() const { return entries_.rows(); }
    const Matrix& entries() const { return entries_; }
    double operator()(int i, int j) const { return entries_(i, j); }
    int edge_count() const;

private:
    explicit Gso(Matrix entries) : entries_(std::move(entries)) {}
    Matrix entries_;
};

// Erdos-Renyi graph with unit weights; each unordered pair carries an edge
// independently with probability p. Deterministic per seed.
Gso generate_er(int n, double p, std::uint64_t seed);

struct NodePartition {
    std::vector<int> observed;  // ascending original indices
    std::vector<int> hidden;    // ascending original indices
    int n() const { return static_cast<int>(observed.size() + hidden.size()); }
    int o() const { return static_cast<int>(observed.size()); }
    int h() const { return static_cast<int>(hidden.size()); }
};

// Hidden set of size h drawn uniformly without replacement; requires
// h < n/2 so hidden nodes stay a small minority.
NodePartition partition_uniform(int n, int h, std::uint64_t seed);

struct GroundTruthScene {
    Gso full_gso;
    NodePartition partition;
    Matrix s_o;   // observed x observed
    Matrix s_oh;  // observed x hidden
    Matrix s_ho;  // hidden x observed
    Matrix s_h;   // hidden x hidden
};

GroundTruthScene extract_blocks(const Gso& full, const NodePartition& part);

// Rebuilds the permuted full matrix [[S_O, S_OH], [S_HO, S_H]]; the inverse
// permutation recovers the original. Used as the block-extraction oracle.
Matrix reassemble(const GroundTruthScene& scene);

struct KnownEdge {
    int i, j;  // i < j, observed-block indices
    double value;
};

// Prior knowledge over observed-block entries (both edges and non-edges):
// the estimator clamps these entries after every prox application.
class KnownEdgeSet {
public:
    KnownEdgeSet() : n_(0) {}
    KnownEdgeSet(int n, std::vector<KnownEdge> edges);  // validates indices

    // Uniformly samples `fraction` of the observed-node pairs (at least one)
    // and clamps them to the values found in s_true.
    static KnownEdgeSet sample_from(const Matrix& s_true, double fraction, std::uint64_t seed);

    bool empty() const { return edges_.empty(); }
    int n() const { return n_; }
    const std::vector<KnownEdge>& edges() const { return edges_; }
    const Matrix& mask() const { return mask_; }      // 1.0 on clamped entries
    const Matrix& values() const { return values_; }  // clamp values

private:
    int n_;
    std::vector<KnownEdge> edges_;
    Matrix mask_;
    Matrix values_;
};

// Plain-text edge list: header "n=<N>", then one "i j w" triple per line
// (upper triangle, nonzero weights, 0-indexed).
void save_edge_list(const Gso& g, std::ostream& os);
void save_edge_list(const Gso& g, const std::string& path);
Gso load_edge_list(std::istream& is);
Gso load_edge_list(const std::string& path);

}  // namespace ongraph
