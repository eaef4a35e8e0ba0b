#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "liplab/util.hpp"

namespace liplab {

// ---------------------------------------------------------------------------
// l_inf(S) for a finite label set S, and the finite-rank norm-1 projections
// induced by a partition of S with one representative per block.
// ---------------------------------------------------------------------------

struct IndexSet {
    std::vector<std::string> labels;

    static std::shared_ptr<const IndexSet> of_size(std::size_t n, const std::string& prefix = "s") {
        auto s = std::make_shared<IndexSet>();
        s->labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) s->labels.push_back(prefix + std::to_string(i));
        return s;
    }

    std::size_t size() const { return labels.size(); }
};

struct BoundedSeq {
    std::shared_ptr<const IndexSet> index;
    Vec values;

    BoundedSeq() = default;
    BoundedSeq(std::shared_ptr<const IndexSet> idx, Vec vals) : index(std::move(idx)), values(std::move(vals)) {
        if (!index || index->size() != values.size())
            throw std::invalid_argument("BoundedSeq: labels/values size mismatch");
    }

    double sup_norm() const { return liplab::sup_norm(values); }
    std::size_t size() const { return values.size(); }

    /// CSV layout: label,value per row.
    std::string to_csv() const {
        std::string out = "label,value\n";
        for (std::size_t i = 0; i < values.size(); ++i)
            out += index->labels[i] + "," + format_g17(values[i]) + "\n";
        return out;
    }
};

inline void check_same_index(const BoundedSeq& a, const BoundedSeq& b) {
    if (a.index == b.index) return;
    if (a.index && b.index && a.index->labels == b.index->labels) return;
    throw std::invalid_argument("BoundedSeq: index set mismatch");
}

struct MapOperator {
    std::shared_ptr<const IndexSet> index;
    std::vector<std::size_t> block_of;         // position -> block id
    std::vector<std::size_t> representatives;  // block id -> position of its representative

    std::size_t rank() const { return representatives.size(); }
    std::size_t domain_size() const { return block_of.size(); }
};

// ---------------------------------------------------------------------------
// Partition a label set so that the value tuples of the generating sequences
// have diameter at most eps inside every block, and induce the projection
// p(a)_x = a_{x_j} for x in block j.
//
// Buckets are the half-open cubical cells [k*eps, (k+1)*eps) of the tuple
// space under the sup metric: the cell diameter is strictly below eps and
// the tie-breaking at cell boundaries is deterministic.  Representatives are
// the first label of each cell in input order.
// ---------------------------------------------------------------------------

inline MapOperator partition_for_diameter(const std::vector<BoundedSeq>& generators, double eps) {
    if (generators.empty()) throw std::invalid_argument("partition_for_diameter: need at least one sequence");
    if (!(eps > 0.0)) throw std::invalid_argument("partition_for_diameter: eps must be positive");
    const std::size_t n = generators.front().size();
    if (n == 0) throw std::invalid_argument("partition_for_diameter: empty index set");
    for (const auto& g : generators) check_same_index(generators.front(), g);

    MapOperator op;
    op.index = generators.front().index;
    op.block_of.assign(n, 0);

    std::map<std::vector<std::int64_t>, std::size_t> cell_to_block;
    std::vector<std::int64_t> key(generators.size());
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t i = 0; i < generators.size(); ++i)
            key[i] = static_cast<std::int64_t>(std::floor(generators[i].values[x] / eps));
        auto [it, inserted] = cell_to_block.try_emplace(key, op.representatives.size());
        if (inserted) op.representatives.push_back(x);
        op.block_of[x] = it->second;
    }
    return op;
}

/// p(a)_x = a_{x_j} for x in block j.
inline BoundedSeq apply(const MapOperator& op, const BoundedSeq& a) {
    if (a.size() != op.domain_size()) throw std::invalid_argument("apply: index mismatch");
    if (!(a.index == op.index || (a.index && op.index && a.index->labels == op.index->labels)))
        throw std::invalid_argument("apply: index mismatch");
    Vec out(a.size());
    for (std::size_t x = 0; x < a.size(); ++x) out[x] = a.values[op.representatives[op.block_of[x]]];
    return BoundedSeq(a.index, std::move(out));
}

// ---------------------------------------------------------------------------
// Net amplification: if F is an eps-net of K in the sup metric and p moves
// every element of F by at most eps, then the triangle inequality
//     ||p(a)-a|| <= ||p(a)-p(b)|| + ||p(b)-b|| + ||b-a|| <= 3 eps
// (p has operator norm 1) bounds the defect on all of K by 3 eps.  The
// certificate verifies this member by member and records the worst ratio.
// ---------------------------------------------------------------------------

struct AmplificationCertificate {
    double eps = 0.0;
    bool net_premise_ok = true;  // every a in K within eps of some b in F
    bool op_premise_ok = true;   // ||p(b)-b|| <= eps for every b in F
    std::vector<std::string> premise_violations;
    struct Row {
        std::size_t k_index = 0;
        double error = 0.0;  // ||p(a)-a||
        double ratio = 0.0;  // error / eps
    };
    std::vector<Row> rows;
    double worst_ratio = 0.0;

    bool pass() const { return net_premise_ok && op_premise_ok && worst_ratio <= 3.0; }
};

inline AmplificationCertificate net_amplification_certificate(const std::vector<BoundedSeq>& K,
                                                              const std::vector<BoundedSeq>& F,
                                                              const MapOperator& op, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("net_amplification_certificate: eps must be positive");
    if (K.empty() || F.empty())
        throw std::invalid_argument("net_amplification_certificate: empty sample or net");
    AmplificationCertificate cert;
    cert.eps = eps;

    for (std::size_t i = 0; i < F.size(); ++i) {
        const double moved = sup_norm(vec_sub(apply(op, F[i]).values, F[i].values));
        if (moved > eps) {
            cert.op_premise_ok = false;
            cert.premise_violations.push_back("net member " + std::to_string(i) + " moved by " +
                                              format_g17(moved) + " > eps");
        }
    }
    for (std::size_t i = 0; i < K.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& b : F) nearest = std::min(nearest, sup_norm(vec_sub(K[i].values, b.values)));
        if (nearest > eps) {
            cert.net_premise_ok = false;
            cert.premise_violations.push_back("sample " + std::to_string(i) + " is " + format_g17(nearest) +
                                              " from the net, > eps");
        }
        const double err = sup_norm(vec_sub(apply(op, K[i]).values, K[i].values));
        cert.rows.push_back({i, err, err / eps});
        cert.worst_ratio = std::max(cert.worst_ratio, err / eps);
    }
    return cert;
}

}  // namespace liplab
