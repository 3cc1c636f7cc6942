#pragma once

// L2-regularized linear max-margin classifier over embedded features:
// one binary model per unordered class pair, majority vote, regularization
// picked by inner stratified cross-validation.

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "place/embedding.hpp"

namespace place {

namespace detail {

// sparse view of an embedded vector (hat coordinates are mostly zero)
struct SparseRow {
    std::vector<int> idx;
    std::vector<double> val;
    double sq_norm = 0.0;
};

inline SparseRow sparsify(const EmbeddedVector& x) {
    SparseRow r;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) {
            r.idx.push_back(static_cast<int>(i));
            r.val.push_back(x[i]);
            r.sq_norm += x[i] * x[i];
        }
    return r;
}

// Dual coordinate descent for the L1-loss SVC
//   min_w 1/2 ||w||^2 + C sum_i max(0, 1 - y_i w^T x~_i),
// with the bias carried as an appended constant-1 feature. Deterministic:
// the per-epoch visiting order comes from the seeded generator.
inline Eigen::VectorXd solve_l1_svc_dual(const std::vector<const SparseRow*>& rows,
                                         const std::vector<double>& y, double C,
                                         Eigen::Index dim, std::uint64_t seed,
                                         int max_epochs = 1000, double tol = 1e-4) {
    const std::size_t n = rows.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim + 1);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) qd[i] = rows[i]->sq_norm + 1.0;  // + bias feature

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);

    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double max_violation = 0.0;
        for (std::size_t i : order) {
            const SparseRow& r = *rows[i];
            double dot = w[dim];  // bias coordinate
            for (std::size_t t = 0; t < r.idx.size(); ++t) dot += w[r.idx[t]] * r.val[t];
            const double grad = y[i] * dot - 1.0;

            double pg = grad;
            if (alpha[i] <= 0.0) pg = std::min(grad, 0.0);
            else if (alpha[i] >= C) pg = std::max(grad, 0.0);
            max_violation = std::max(max_violation, std::fabs(pg));
            if (pg == 0.0) continue;

            const double old = alpha[i];
            alpha[i] = std::min(std::max(old - grad / qd[i], 0.0), C);
            const double delta = (alpha[i] - old) * y[i];
            if (delta != 0.0) {
                for (std::size_t t = 0; t < r.idx.size(); ++t) w[r.idx[t]] += delta * r.val[t];
                w[dim] += delta;
            }
        }
        if (max_violation < tol) break;
    }
    return w;
}

}  // namespace detail

struct LinearModel {
    std::vector<int> labels;  // distinct labels, ascending
    struct PairModel {
        std::size_t a = 0, b = 0;  // class indices, a < b; positive side is a
        Eigen::VectorXd w;
        double bias = 0.0;
    };
    std::vector<PairModel> pairs;
    double C = 1.0;
    std::uint64_t seed = 0;
    Eigen::Index dim = 0;
};

/// Majority vote over the pairwise models; ties go to the smallest label.
/// Returns the index into model.labels.
inline std::size_t predict_linear(const LinearModel& m, const EmbeddedVector& x) {
    if (x.size() != m.dim) throw std::invalid_argument("predict_linear: dimension mismatch");
    std::vector<std::size_t> votes(m.labels.size(), 0);
    for (const auto& p : m.pairs) {
        const double score = p.w.dot(x) + p.bias;
        ++votes[score >= 0.0 ? p.a : p.b];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = c;
    return best;
}

namespace detail {

inline LinearModel train_ovo_fixed_c(const std::vector<SparseRow>& rows,
                                     const std::vector<std::size_t>& cls,
                                     const std::vector<int>& labels, Eigen::Index dim,
                                     double C, std::uint64_t seed) {
    LinearModel m;
    m.labels = labels;
    m.C = C;
    m.seed = seed;
    m.dim = dim;
    const std::size_t k = labels.size();
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<const SparseRow*> sub;
            std::vector<double> y;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (cls[i] == a) {
                    sub.push_back(&rows[i]);
                    y.push_back(1.0);
                } else if (cls[i] == b) {
                    sub.push_back(&rows[i]);
                    y.push_back(-1.0);
                }
            }
            Eigen::VectorXd w =
                solve_l1_svc_dual(sub, y, C, dim, seed ^ (a * 0x9e3779b9ull + b));
            LinearModel::PairModel pm;
            pm.a = a;
            pm.b = b;
            pm.bias = w[dim];
            pm.w = w.head(dim);
            m.pairs.push_back(std::move(pm));
        }
    return m;
}

}  // namespace detail

/// Deterministic stratified fold assignment: per class, samples are
/// shuffled by the seeded generator and dealt round-robin.
inline std::vector<std::size_t> stratified_folds(const std::vector<std::size_t>& cls,
                                                 std::size_t n_classes, std::size_t n_folds,
                                                 std::uint64_t seed) {
    std::vector<std::size_t> fold(cls.size(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < cls.size(); ++i)
            if (cls[i] == c) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = j % n_folds;
    }
    return fold;
}

/// Train the one-vs-one linear classifier. C is selected from the grid by
/// inner stratified 5-fold accuracy (ties to the smaller C), then the
/// final model is fit on all data at the chosen C.
inline LinearModel train_linear(const std::vector<EmbeddedVector>& X,
                                const std::vector<int>& y,
                                std::vector<double> C_grid, std::uint64_t seed) {
    if (X.empty() || X.size() != y.size())
        throw std::invalid_argument("train_linear: bad sample");
    std::vector<int> labels;
    {
        std::map<int, std::size_t> seen;
        for (int v : y) seen.emplace(v, 0);
        for (auto& [v, idx] : seen) {
            idx = labels.size();
            labels.push_back(v);
        }
        if (labels.size() < 2) throw std::invalid_argument("train_linear: need >= 2 classes");
    }
    std::map<int, std::size_t> label_index;
    for (std::size_t c = 0; c < labels.size(); ++c) label_index[labels[c]] = c;
    std::vector<std::size_t> cls(y.size());
    std::vector<std::size_t> class_count(labels.size(), 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        cls[i] = label_index[y[i]];
        ++class_count[cls[i]];
    }
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (class_count[c] < 2)
            throw std::invalid_argument("train_linear: every class needs >= 2 samples");

    const Eigen::Index dim = X[0].size();
    std::vector<detail::SparseRow> rows(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != dim) throw std::invalid_argument("train_linear: dimension mismatch");
        rows[i] = detail::sparsify(X[i]);
    }

    if (C_grid.empty())
        C_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
    std::sort(C_grid.begin(), C_grid.end());

    double best_c = C_grid.front();
    if (C_grid.size() > 1) {
        const std::size_t m_min = *std::min_element(class_count.begin(), class_count.end());
        const std::size_t n_folds = std::min<std::size_t>(5, m_min);
        const auto fold = stratified_folds(cls, labels.size(), n_folds, seed);
        double best_acc = -1.0;
        for (double C : C_grid) {
            std::size_t hits = 0, total = 0;
            for (std::size_t f = 0; f < n_folds; ++f) {
                std::vector<detail::SparseRow> tr_rows;
                std::vector<std::size_t> tr_cls;
                std::vector<std::size_t> test_ids;
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (fold[i] == f) {
                        test_ids.push_back(i);
                    } else {
                        tr_rows.push_back(rows[i]);
                        tr_cls.push_back(cls[i]);
                    }
                }
                auto m = detail::train_ovo_fixed_c(tr_rows, tr_cls, labels, dim, C,
                                                   seed ^ (0xabcdull + f));
                for (std::size_t i : test_ids) {
                    hits += predict_linear(m, X[i]) == cls[i] ? 1 : 0;
                    ++total;
                }
            }
            const double acc = total ? static_cast<double>(hits) / total : 0.0;
            if (acc > best_acc + 1e-12) {
                best_acc = acc;
                best_c = C;
            }
        }
    }
    return detail::train_ovo_fixed_c(rows, cls, labels, dim, best_c, seed);
}

}  // namespace place
