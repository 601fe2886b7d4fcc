#include "so3syn/trace_potential.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace so3syn;
using testutil::kPi;
using testutil::random_rotation;
using testutil::rotation_distance;

namespace {

const Vec3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};

TraceShape wahba_shape() {
    // three orthogonal measurements, weights 0.2 / 0.4 / 0.4
    InertialVectorSet vs;
    vs.items = {{e1, 0.2}, {e2, 0.4}, {e3, 0.4}};
    return TraceShape::from_vectors(vs);
}

// shape whose G matrix is literally diag(0.6, 0.6, 0.8)
TraceShape g668_shape() { return TraceShape::from_matrix(Mat3::diag(0.4, 0.4, 0.2)); }

// direct evaluation of tr(M (I - X)), independent of TraceShape::value
double psi_direct(const Mat3& m, const Mat3& x) {
    Mat3 d = m * (Mat3::identity() - x);
    return trace(d);
}

}  // namespace

TEST_CASE("shape_from_vectors reproduces the weighted outer-product sum") {
    TraceShape s = wahba_shape();
    CHECK(frobenius_norm(s.m() - Mat3::diag(0.2, 0.4, 0.4)) < 1e-15);
    // G as a matrix is diag(0.8, 0.6, 0.6); its eigenvalues in the reordered
    // labeling are (0.6, 0.6, 0.8)
    CHECK(frobenius_norm(s.g() - Mat3::diag(0.8, 0.6, 0.6)) < 1e-15);
    CHECK(s.spec_g().lambda[0] == doctest::Approx(0.6));
    CHECK(s.spec_g().lambda[2] == doctest::Approx(0.8));
    CHECK(s.xi() == doctest::Approx(0.75));
    const auto& lab = s.classification();
    CHECK(lab.lam_g[0] == doctest::Approx(0.6));
    CHECK(lab.lam_g[1] == doctest::Approx(0.6));
    CHECK(lab.lam_g[2] == doctest::Approx(0.8));

    InertialVectorSet two;
    two.items = {{e1, 1.0}, {e2, 1.0}};
    TraceShape s2 = TraceShape::from_vectors(two);
    CHECK(frobenius_norm(s2.m() - Mat3::diag(1, 1, 0)) < 1e-15);
    CHECK(frobenius_norm(s2.g() - Mat3::diag(1, 1, 2)) < 1e-15);
    CHECK(s2.lambda_min_g() > 0.0);
}

TEST_CASE("collinear and degenerate vector sets are rejected") {
    InertialVectorSet collinear;
    collinear.items = {{e1, 0.5}, {e1, 0.7}};
    CHECK_THROWS_AS(TraceShape::from_vectors(collinear), std::invalid_argument);

    InertialVectorSet bad_weight;
    bad_weight.items = {{e1, 0.0}, {e2, 1.0}};
    CHECK_THROWS_AS(TraceShape::from_vectors(bad_weight), std::invalid_argument);

    // rank-1 matrix: G singular
    CHECK_THROWS_AS(TraceShape::from_matrix(Mat3::diag(0, 0, 1)), std::invalid_argument);
}

TEST_CASE("classify covers the five direction-selection classes") {
    CHECK(TraceShape::from_matrix(Mat3::diag(0.4, 0.4, 0.4)).shape_class() == ShapeClass::AllEqual);
    TraceShape item2 = TraceShape::from_matrix(Mat3::diag(0.2, 0.4, 0.4));
    CHECK(item2.shape_class() == ShapeClass::TwoLargeEqualPosMin);
    // relabeled: the repeated pair comes first, the distinct direction last
    CHECK(item2.classification().lam_m[0] == doctest::Approx(0.4));
    CHECK(item2.classification().lam_m[2] == doctest::Approx(0.2));
    CHECK(std::abs(dot(item2.classification().v[2], e1)) == doctest::Approx(1.0));

    CHECK(TraceShape::from_matrix(Mat3::diag(1, 1, 0)).shape_class() ==
          ShapeClass::TwoLargeEqualAnyMin);
    CHECK(TraceShape::from_matrix(Mat3::diag(0.3, 0.3, 0.6)).shape_class() ==
          ShapeClass::TwoSmallEqual);
    CHECK(TraceShape::from_matrix(Mat3::diag(0.1, 0.3, 0.6)).shape_class() ==
          ShapeClass::AllDistinct);
}

TEST_CASE("classify flags near-degenerate spectra and honors mult_tol") {
    // relative gap of 4e-9 with tolerance 1e-9: distinct but within the 10x band
    TraceShape near = TraceShape::from_matrix(Mat3::diag(0.2, 0.4, 0.4 * (1.0 + 4e-9)));
    CHECK(near.classification().near_degenerate);

    // widening the tolerance merges the pair
    TraceShape merged = TraceShape::from_matrix(Mat3::diag(0.2, 0.4, 0.4 * (1.0 + 4e-9)), 1e-6);
    CHECK(merged.shape_class() == ShapeClass::TwoLargeEqualPosMin);
    CHECK_FALSE(merged.classification().near_degenerate);
}

TEST_CASE("psi value: pinned points and the axis-angle identity") {
    TraceShape s = g668_shape();
    CHECK(s.value(Rotation::identity()) == 0.0);
    CHECK(s.value(rodrigues(kPi, e3)) == doctest::Approx(1.6).epsilon(1e-12));

    Rng rng(31);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        double th = rng.uniform(0.0, kPi);
        Vec3 u = rng.unit_vec3();
        double lhs = s.value(rodrigues(th, u));
        double rhs = (1.0 - std::cos(th)) * dot(u, s.g() * u);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("psi value is a potential: positive away from identity, bounded") {
    TraceShape s = wahba_shape();
    Rng rng(32);
    for (int i = 0; i < 10000; ++i) {
        Rotation x = random_rotation(rng);
        double v = s.value(x);
        CHECK(v >= -1e-15);
        CHECK(v <= 2.0 * s.lambda_max_g() + 1e-12);
        if (frobenius_norm(x.matrix() - Mat3::identity()) > 1e-9) CHECK(v > 0.0);
    }
}

TEST_CASE("psi gradient vanishes exactly on the critical set") {
    TraceShape s = wahba_shape();
    CHECK(norm(s.gradient(Rotation::identity())) == 0.0);
    // half-turns about eigenvectors of M
    for (const Vec3& v : {e1, e2, e3, normalized({0.0, 1.0, 1.0})}) {
        CHECK(norm(s.gradient(rodrigues(kPi, v))) < 1e-12);
    }
}

TEST_CASE("psi gradient exceeds the floor away from the critical set") {
    TraceShape s = wahba_shape();
    Rng rng(33);
    int tested = 0;
    for (int i = 0; i < 10000; ++i) {
        Rotation x = random_rotation(rng);
        // distance to {I} u R_a(pi, E(M)): eigenvector branches are e1 and
        // the unit circle in span{e2, e3}
        double d = rotation_angle(x);
        d = std::min(d, rotation_distance(x, rodrigues(kPi, e1)));
        for (int j = 0; j < 360; ++j) {
            double t = j * kPi / 180.0;
            Vec3 v = std::cos(t) * e2 + std::sin(t) * e3;
            d = std::min(d, rotation_distance(x, rodrigues(kPi, v)));
        }
        if (d < 0.1) continue;
        ++tested;
        CHECK(norm(s.gradient(x)) > 1e-4);
    }
    CHECK(tested > 5000);
}

TEST_CASE("psi gradient matches finite differences") {
    TraceShape s = wahba_shape();
    Rng rng(34);
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Rotation x = random_rotation(rng, 0.98 * kPi);
        Vec3 w = rng.unit_vec3();
        Rotation xp = x * rodrigues(h, w);
        Rotation xm = x * rodrigues(-h, w);
        double fd = (s.value(xp) - s.value(xm)) / (2.0 * h);
        double an = 2.0 * dot(s.gradient(x), w);
        worst = std::max(worst, std::abs(an - fd) / (std::abs(fd) + 1e-12));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("delta: all-equal class extremes") {
    TraceShape s = TraceShape::from_matrix(Mat3::diag(0.4, 0.4, 0.4));
    double lam_g = 0.8;  // tr(M) - lambda
    CHECK(s.delta(e1, e2) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s.delta(e1, e1) == doctest::Approx(lam_g));
}

TEST_CASE("delta: pinned two-equal example") {
    TraceShape s = g668_shape();  // G = diag(0.6, 0.6, 0.8), distinct branch e3
    CHECK(s.delta(e3, e1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("delta rejects non-eigenvectors") {
    TraceShape s = wahba_shape();
    CHECK_THROWS_AS(s.delta(normalized({1.0, 1.0, 0.0}), e1), std::invalid_argument);
}

TEST_CASE("delta satisfies the half-turn evaluation identity (all classes)") {
    Rng rng(35);
    struct Case {
        Mat3 m;
        std::vector<Vec3> branches;
    };
    std::vector<Case> cases;
    cases.push_back({Mat3::diag(0.4, 0.4, 0.4), {rng.unit_vec3(), rng.unit_vec3(), e3}});
    {
        std::vector<Vec3> br = {e1};
        for (int j = 0; j < 8; ++j) {
            double t = rng.uniform(0.0, 2.0 * kPi);
            br.push_back(std::cos(t) * e2 + std::sin(t) * e3);
        }
        cases.push_back({Mat3::diag(0.2, 0.4, 0.4), br});
    }
    {
        std::vector<Vec3> br = {e3};
        for (int j = 0; j < 8; ++j) {
            double t = rng.uniform(0.0, 2.0 * kPi);
            br.push_back(std::cos(t) * e1 + std::sin(t) * e2);
        }
        cases.push_back({Mat3::diag(0.3, 0.3, 0.6), br});
    }
    cases.push_back({Mat3::diag(0.1, 0.3, 0.6), {e1, e2, e3}});

    double worst = 0.0;
    for (const Case& c : cases) {
        TraceShape s = TraceShape::from_matrix(c.m);
        for (const Vec3& v : c.branches) {
            double lam_g = s.lambda_g_of(v);
            for (int i = 0; i < 50; ++i) {
                double th = rng.uniform(0.0, kPi);
                Vec3 u = rng.unit_vec3();
                Mat3 x = rodrigues(kPi, v).matrix() * rodrigues(th, u).matrix();
                double lhs = psi_direct(s.m(), x);
                double rhs = 2.0 * lam_g - (1.0 - std::cos(th)) * s.delta(v, u);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("delta: all-distinct formula against the direct trace oracle at pi/2") {
    TraceShape s = TraceShape::from_matrix(Mat3::diag(0.1, 0.3, 0.6));
    Rng rng(36);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        Vec3 u = rng.unit_vec3();
        for (const Vec3& v : {e1, e2, e3}) {
            double lam_g = s.lambda_g_of(v);
            Mat3 x = rodrigues(kPi, v).matrix() * rodrigues(kPi / 2.0, u).matrix();
            double from_oracle = 2.0 * lam_g - psi_direct(s.m(), x);  // (1 - cos(pi/2)) = 1
            worst = std::max(worst, std::abs(from_oracle - s.delta(v, u)));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("M and G share eigenvectors with shifted eigenvalues") {
    for (const Mat3& m : {Mat3::diag(0.1, 0.3, 0.6), Mat3::diag(0.2, 0.4, 0.4)}) {
        TraceShape s = TraceShape::from_matrix(m);
        double tr = trace(s.m());
        for (int i = 0; i < 3; ++i) {
            const Vec3& v = s.spec_m().v[i];
            double lam_g = tr - s.spec_m().lambda[i];
            CHECK(norm(s.g() * v - lam_g * v) < 1e-9);
        }
    }
}

TEST_CASE("xi exceeds one half whenever the two largest weights coincide and the rest is positive") {
    Rng rng(37);
    for (int i = 0; i < 200; ++i) {
        double pair = rng.uniform(0.2, 1.0);
        double small = rng.uniform(0.01, pair * 0.99);
        TraceShape s = TraceShape::from_matrix(Mat3::diag(small, pair, pair));
        REQUIRE(s.shape_class() == ShapeClass::TwoLargeEqualPosMin);
        CHECK(s.xi() > 0.5);
    }
}
