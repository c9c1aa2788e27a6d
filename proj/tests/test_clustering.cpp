#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ttrec/clustering.hpp"

using namespace ttrec;

namespace {

Matrix two_blobs(Rng& rng, int per_blob, int dim, double sep, double sigma) {
    Matrix e(2 * per_blob, dim);
    for (int n = 0; n < 2 * per_blob; ++n) {
        const double center = n < per_blob ? -sep : sep;
        for (int d = 0; d < dim; ++d) e(n, d) = rng.gaussian(d == 0 ? center : 0.0, sigma);
    }
    return e;
}

}  // namespace

TEST_CASE("assign hand arithmetic") {
    // equidistant point between two centers: both kernels give a fifty-fifty
    Matrix e(1, 1);
    e(0, 0) = 0.5;
    Matrix centers(2, 1);
    centers(0, 0) = 0.0;
    centers(1, 0) = 1.0;
    for (AssignKernel k : {AssignKernel::student_t, AssignKernel::gaussian}) {
        const Matrix q = assign(e, centers, k);
        CHECK(q(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(q(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    }

    // Gaussian kernel at 0.25: softmax(-0.0625, -0.5625) = sigmoid(0.5)
    e(0, 0) = 0.25;
    Matrix q = assign(e, centers, AssignKernel::gaussian);
    const double expected = 1.0 / (1.0 + std::exp(-0.5));
    CHECK(std::abs(q(0, 0) - expected) < 1e-12);
    CHECK(std::abs(q(0, 1) - (1.0 - expected)) < 1e-12);

    // Student-t kernel at 0.25: weights (1/(1+1/16), 1/(1+9/16)) -> 25/42
    q = assign(e, centers, AssignKernel::student_t);
    CHECK(std::abs(q(0, 0) - 25.0 / 42.0) < 1e-12);
    CHECK(std::abs(q(0, 1) - 17.0 / 42.0) < 1e-12);

    // point sitting on a center with the other far away
    Matrix far(2, 1);
    far(0, 0) = 0.0;
    far(1, 0) = 10.0;
    e(0, 0) = 0.0;
    q = assign(e, far, AssignKernel::gaussian);
    CHECK(q(0, 0) > 1.0 - 1e-9);
    q = assign(e, far, AssignKernel::student_t);
    CHECK(q(0, 0) > 0.98);
}

TEST_CASE("soft kmeans claims one center per point when N equals K") {
    Matrix e(3, 2);
    e(0, 0) = 0.0;
    e(1, 0) = 10.0;
    e(2, 0) = 20.0;
    Rng rng(3);
    const ClusterState st = fit_soft_kmeans(e, 3, rng, AssignKernel::gaussian);
    // every point should own some center with near-certain assignment
    for (std::size_t n = 0; n < 3; ++n) {
        double best = 0.0;
        for (std::size_t k = 0; k < 3; ++k) best = std::max(best, st.q(n, k));
        CHECK(best > 1.0 - 1e-6);
    }
    Rng rng_t(3);
    const ClusterState st_t = fit_soft_kmeans(e, 3, rng_t, AssignKernel::student_t);
    for (std::size_t n = 0; n < 3; ++n) {
        double best = 0.0;
        for (std::size_t k = 0; k < 3; ++k) best = std::max(best, st_t.q(n, k));
        CHECK(best > 0.97);
    }
}

TEST_CASE("soft kmeans is invariant to duplicating every point") {
    Rng data_rng(5);
    const Matrix e = two_blobs(data_rng, 40, 3, 5.0, 0.1);
    Matrix doubled(2 * e.rows, e.cols);
    for (std::size_t n = 0; n < e.rows; ++n) {
        std::copy(e.row(n), e.row(n) + e.cols, doubled.row(2 * n));
        std::copy(e.row(n), e.row(n) + e.cols, doubled.row(2 * n + 1));
    }
    Rng r1(7), r2(9);
    const ClusterState a = fit_soft_kmeans(e, 2, r1);
    const ClusterState b = fit_soft_kmeans(doubled, 2, r2);
    // same optimum up to center order
    double direct = std::sqrt(squared_distance(a.centers.row_span(0), b.centers.row_span(0))) +
                    std::sqrt(squared_distance(a.centers.row_span(1), b.centers.row_span(1)));
    double swapped = std::sqrt(squared_distance(a.centers.row_span(0), b.centers.row_span(1))) +
                     std::sqrt(squared_distance(a.centers.row_span(1), b.centers.row_span(0)));
    CHECK(std::min(direct, swapped) < 1e-3);
}

TEST_CASE("soft kmeans recovers well-separated blob means") {
    Rng data_rng(11);
    const int per_blob = 150;
    const Matrix e = two_blobs(data_rng, per_blob, 4, 5.0, 0.1);
    Vector mean_a(4, 0.0), mean_b(4, 0.0);
    for (int n = 0; n < per_blob; ++n)
        for (int d = 0; d < 4; ++d) {
            mean_a[d] += e(n, d) / per_blob;
            mean_b[d] += e(n + per_blob, d) / per_blob;
        }
    // Gaussian kernel: cross-blob weights vanish, centers land on the means.
    // Student-t tails keep ~1/(1+sep^2) of weight on the far blob, so its
    // centers carry a small inward bias.
    for (auto [kernel, tol] : {std::pair{AssignKernel::gaussian, 0.05},
                               std::pair{AssignKernel::student_t, 0.2}}) {
        Rng rng(13);
        const ClusterState st = fit_soft_kmeans(e, 2, rng, kernel);
        auto dist = [&](const Vector& m, std::size_t k) {
            return std::sqrt(squared_distance(m, st.centers.row_span(k)));
        };
        const double direct = std::max(dist(mean_a, 0), dist(mean_b, 1));
        const double swapped = std::max(dist(mean_a, 1), dist(mean_b, 0));
        CHECK(std::min(direct, swapped) < tol);
    }
}

TEST_CASE("soft kmeans rejects more clusters than samples and is deterministic") {
    Matrix e(2, 2, 1.0);
    Rng rng(1);
    CHECK_THROWS_AS(fit_soft_kmeans(e, 3, rng), std::invalid_argument);

    Rng data_rng(15);
    const Matrix blob = two_blobs(data_rng, 30, 3, 4.0, 0.3);
    Rng ra(17), rb(17);
    const ClusterState a = fit_soft_kmeans(blob, 2, ra);
    const ClusterState b = fit_soft_kmeans(blob, 2, rb);
    CHECK(a.centers.v == b.centers.v);
    CHECK(a.q.v == b.q.v);
}

TEST_CASE("sharpen hand arithmetic") {
    Matrix q(1, 2);
    q(0, 0) = 0.8;
    q(0, 1) = 0.2;
    const Matrix p = sharpen(q, 0.5);
    CHECK(std::abs(p(0, 0) - 0.64 / 0.68) < 1e-9);
    CHECK(std::abs(p(0, 1) - 0.04 / 0.68) < 1e-9);

    const Matrix same = sharpen(q, 1.0);
    CHECK(std::abs(same(0, 0) - 0.8) < 1e-12);
    CHECK(std::abs(same(0, 1) - 0.2) < 1e-12);

    Matrix uniform(1, 4, 0.25);
    for (double t : {0.1, 0.5, 2.0}) {
        const Matrix u = sharpen(uniform, t);
        for (double x : u.v) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
    }

    CHECK_THROWS_AS(sharpen(q, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sharpen(q, -1.0), std::invalid_argument);
}

TEST_CASE("sharpening lowers entropy and approaches one-hot") {
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.uniform_int(6);
        Matrix q(1, k);
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            q(0, i) = 0.05 + rng.uniform();
            s += q(0, i);
        }
        for (std::size_t i = 0; i < k; ++i) q(0, i) /= s;

        const Matrix p = sharpen(q, 0.5);
        CHECK(is_prob_vector(p.row_span(0), 1e-9));
        CHECK(entropy(p.row_span(0)) <= entropy(q.row_span(0)) + 1e-9);

        // near-zero temperature converges to the argmax indicator when the
        // max is separated by at least 0.05
        double top = 0.0, second = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (q(0, i) > top) {
                top = q(0, i);
                arg = i;
            }
        for (std::size_t i = 0; i < k; ++i)
            if (i != arg) second = std::max(second, q(0, i));
        if (top - second >= 0.05) {
            const Matrix hard = sharpen(q, 1e-3);
            CHECK(hard(0, arg) > 0.999);
        }
    }
}

TEST_CASE("high confidence selection by threshold") {
    Matrix q(3, 2);
    q(0, 0) = 0.95;
    q(0, 1) = 0.05;
    q(1, 0) = 0.50;
    q(1, 1) = 0.50;
    q(2, 1) = 0.91;
    q(2, 0) = 0.09;
    const ConfidenceSelection sel = select_high_confidence(q, 0.9);
    REQUIRE(sel.indices.size() == 2);
    CHECK(sel.indices[0] == 0);
    CHECK(sel.indices[1] == 2);
    CHECK(sel.labels[0] == 0);
    CHECK(sel.labels[1] == 1);
    CHECK_FALSE(sel.fallback_used);
}

TEST_CASE("tau zero selects everything") {
    Rng rng(21);
    Matrix q(40, 3);
    for (std::size_t n = 0; n < q.rows; ++n) {
        Vector row(3);
        for (double& x : row) x = rng.uniform();
        double s = row[0] + row[1] + row[2];
        for (std::size_t k = 0; k < 3; ++k) q(n, k) = row[k] / s;
    }
    const ConfidenceSelection sel = select_high_confidence(q, 0.0);
    CHECK(sel.indices.size() == q.rows);
    CHECK_FALSE(sel.fallback_used);
}

TEST_CASE("selection is monotone in tau before the fallback") {
    Rng rng(23);
    Matrix q(200, 4);
    for (std::size_t n = 0; n < q.rows; ++n) {
        Vector row(4);
        double s = 0.0;
        for (double& x : row) {
            x = 0.01 + rng.uniform();
            s += x;
        }
        for (std::size_t k = 0; k < 4; ++k) q(n, k) = row[k] / s;
    }
    ConfidenceSelection prev = select_high_confidence(q, 0.0);
    for (double tau : {0.3, 0.4, 0.5, 0.6}) {
        const ConfidenceSelection cur = select_high_confidence(q, tau);
        if (cur.fallback_used || prev.fallback_used) break;
        std::set<int> prev_set(prev.indices.begin(), prev.indices.end());
        for (int idx : cur.indices) CHECK(prev_set.count(idx) == 1);
        prev = cur;
    }
}

TEST_CASE("fallback takes the most confident tenth when the threshold is unreachable") {
    Matrix q(50, 2);
    for (std::size_t n = 0; n < q.rows; ++n) {
        q(n, 0) = 0.5 + 0.004 * double(n);  // max prob in [0.5, 0.7)
        q(n, 1) = 1.0 - q(n, 0);
    }
    const ConfidenceSelection sel = select_high_confidence(q, 0.99);
    CHECK(sel.fallback_used);
    CHECK(sel.indices.size() == 5);  // top 10% of 50
    for (int idx : sel.indices) CHECK(idx >= 45);
}

TEST_CASE("divide partitions selected rows by label") {
    ConfidenceSelection sel;
    sel.indices = {0, 1, 2, 3};
    sel.labels = {0, 1, 0, 1};
    const auto clusters = divide(sel, 2);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0] == std::vector<int>{0, 2});
    CHECK(clusters[1] == std::vector<int>{1, 3});

    ConfidenceSelection all_same;
    all_same.indices = {5, 6, 7};
    all_same.labels = {1, 1, 1};
    const auto one = divide(all_same, 3);
    CHECK(one[0].empty());
    CHECK(one[1].size() == 3);
    CHECK(one[2].empty());

    std::size_t total = 0;
    for (const auto& c : clusters) total += c.size();
    CHECK(total == sel.indices.size());
}

TEST_CASE("compute_centers averages members") {
    Matrix e(4, 2);
    e(0, 0) = 1.0;
    e(0, 1) = 0.0;
    e(1, 0) = 0.0;
    e(1, 1) = 1.0;
    e(2, 0) = 3.0;
    e(2, 1) = 3.0;
    e(3, 0) = -1.0;
    e(3, 1) = 5.0;
    const std::vector<std::vector<int>> clusters{{0, 1}, {2}};
    const auto centers = compute_centers(e, clusters);
    CHECK(centers[0][0] == doctest::Approx(0.5));
    CHECK(centers[0][1] == doctest::Approx(0.5));
    CHECK(centers[1][0] == doctest::Approx(3.0));
    CHECK(centers[1][1] == doctest::Approx(3.0));

    // translation moves every center by the same vector
    Matrix shifted = e;
    for (std::size_t n = 0; n < e.rows; ++n) {
        shifted(n, 0) += 2.0;
        shifted(n, 1) -= 1.0;
    }
    const auto moved = compute_centers(shifted, clusters);
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK(moved[m][0] == doctest::Approx(centers[m][0] + 2.0));
        CHECK(moved[m][1] == doctest::Approx(centers[m][1] - 1.0));
    }

    CHECK_THROWS_WITH_AS(compute_centers(e, {{0, 1}, {}}),
                         doctest::Contains("contrastive"), std::invalid_argument);
}

TEST_CASE("assignment rows are stochastic") {
    Rng data_rng(27);
    const Matrix e = two_blobs(data_rng, 25, 3, 2.0, 0.5);
    Rng rng(29);
    const ClusterState st = fit_soft_kmeans(e, 3, rng);
    for (std::size_t n = 0; n < st.q.rows; ++n) CHECK(is_prob_vector(st.q.row_span(n), 1e-9));
    const Matrix p = sharpen(st.q, 0.1);
    for (std::size_t n = 0; n < p.rows; ++n) CHECK(is_prob_vector(p.row_span(n), 1e-9));
}
