#include "doctest.h"

#include <cstring>

#include "sib/kernels.hpp"
#include "sib/matrix.hpp"
#include "sib/rng.hpp"

using namespace sib;

namespace {

Matrix random_matrix(int r, int c, Rng& rng, double lo = -2.0, double hi = 2.0) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng_uniform(rng, lo, hi);
    return m;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar and avx2 kernels agree bit for bit") {
    const kern::KernelTable* avx2 = kern::avx2_kernels();
    if (!avx2) {
        MESSAGE("avx2 not available on this machine, equivalence test skipped");
        return;
    }
    const kern::KernelTable& ref = kern::scalar_kernels();
    Rng rng(7);

    // Shapes chosen to exercise the vector body and the remainder tails.
    int shapes[][3] = {{1, 1, 1}, {3, 5, 4}, {4, 4, 8}, {7, 3, 5}, {2, 9, 6}, {5, 5, 13}};
    for (auto [m, k, n] : shapes) {
        Matrix a = random_matrix(m, k, rng), b = random_matrix(k, n, rng);
        Matrix c1(m, n), c2(m, n);
        ref.matmul(a.data.data(), b.data.data(), c1.data.data(), m, k, n);
        avx2->matmul(a.data.data(), b.data.data(), c2.data.data(), m, k, n);
        CHECK(bit_equal(c1.data, c2.data));

        Matrix acc1 = random_matrix(m, n, rng);
        Matrix acc2 = acc1;
        ref.matmul_acc(a.data.data(), b.data.data(), acc1.data.data(), m, k, n);
        avx2->matmul_acc(a.data.data(), b.data.data(), acc2.data.data(), m, k, n);
        CHECK(bit_equal(acc1.data, acc2.data));
    }

    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 129u}) {
        Matrix x = random_matrix(1, static_cast<int>(n), rng, -3.0, 3.0);
        Matrix y = random_matrix(1, static_cast<int>(n), rng, -3.0, 3.0);
        Matrix o1(1, static_cast<int>(n)), o2(1, static_cast<int>(n));

        ref.add(x.data.data(), y.data.data(), o1.data.data(), n);
        avx2->add(x.data.data(), y.data.data(), o2.data.data(), n);
        CHECK(bit_equal(o1.data, o2.data));

        ref.sub(x.data.data(), y.data.data(), o1.data.data(), n);
        avx2->sub(x.data.data(), y.data.data(), o2.data.data(), n);
        CHECK(bit_equal(o1.data, o2.data));

        ref.mul(x.data.data(), y.data.data(), o1.data.data(), n);
        avx2->mul(x.data.data(), y.data.data(), o2.data.data(), n);
        CHECK(bit_equal(o1.data, o2.data));

        ref.scale(x.data.data(), 1.7, o1.data.data(), n);
        avx2->scale(x.data.data(), 1.7, o2.data.data(), n);
        CHECK(bit_equal(o1.data, o2.data));

        ref.relu(x.data.data(), o1.data.data(), n);
        avx2->relu(x.data.data(), o2.data.data(), n);
        CHECK(bit_equal(o1.data, o2.data));

        Matrix acc1 = y, acc2 = y;
        ref.axpy(-0.37, x.data.data(), acc1.data.data(), n);
        avx2->axpy(-0.37, x.data.data(), acc2.data.data(), n);
        CHECK(bit_equal(acc1.data, acc2.data));

        Matrix r1 = y, r2 = y;
        ref.relu_bwd_acc(x.data.data(), y.data.data(), r1.data.data(), n);
        avx2->relu_bwd_acc(x.data.data(), y.data.data(), r2.data.data(), n);
        CHECK(bit_equal(r1.data, r2.data));
    }
}

TEST_CASE("backend selection") {
    std::string before(kern::active_backend());
    kern::select_backend("scalar");
    CHECK(kern::active_backend() == "scalar");
    CHECK_THROWS_AS(kern::select_backend("never-heard-of-it"), ConfigError);
    kern::select_backend("auto");
    if (kern::avx2_supported())
        CHECK(kern::active_backend() == "avx2");
    else
        CHECK(kern::active_backend() == "scalar");
    kern::select_backend(before);
}
