#include "oddforms/qlinalg.hpp"

#include <algorithm>
#include <numeric>

namespace oddforms::qla {

std::vector<std::size_t> rref(Mat& a) {
    std::vector<std::size_t> pivots;
    if (a.empty()) return pivots;
    std::size_t rows = a.size(), cols = a[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t sel = r;
        while (sel < rows && a[sel][c] == 0) ++sel;
        if (sel == rows) continue;
        std::swap(a[sel], a[r]);
        Rat inv = a[r][c];
        for (std::size_t j = c; j < cols; ++j) a[r][j] /= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rat f = a[i][c];
            for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

std::size_t rank(Mat a) { return rref(a).size(); }

std::optional<Vec> solve(const Mat& a, const Vec& b) {
    if (a.empty()) {
        for (const auto& v : b)
            if (v != 0) return std::nullopt;
        return Vec{};
    }
    std::size_t rows = a.size(), cols = a[0].size();
    Mat aug = a;
    for (std::size_t i = 0; i < rows; ++i) aug[i].push_back(b[i]);
    auto pivots = rref(aug);
    // inconsistent when a pivot lands in the augmented column
    if (!pivots.empty() && pivots.back() == cols) return std::nullopt;
    Vec x(cols, Rat(0));
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug[i][cols];
    return x;
}

std::vector<Vec> kernel_basis(const Mat& a) {
    std::vector<Vec> basis;
    if (a.empty()) return basis;
    std::size_t cols = a[0].size();
    Mat m = a;
    auto pivots = rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        Vec v(cols, Rat(0));
        v[free] = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

Vec canonical_direction(const Vec& v) {
    Int lcm = 1;
    for (const auto& q : v)
        if (q != 0) lcm = boost::multiprecision::lcm(lcm, Int(boost::multiprecision::denominator(q)));
    Int g = 0;
    std::vector<Int> ints(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Rat s = v[i] * lcm;
        ints[i] = Int(boost::multiprecision::numerator(s));
        g = boost::multiprecision::gcd(g, ints[i]);
    }
    if (g == 0) return Vec(v.size(), Rat(0));
    if (g < 0) g = -g;
    int sign = 0;
    for (const auto& x : ints) {
        if (x != 0) { sign = x > 0 ? 1 : -1; break; }
    }
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rat(ints[i] * sign / g);
    return out;
}

namespace {

Mat transpose(const Mat& a) {
    if (a.empty()) return {};
    Mat t(a[0].size(), Vec(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

}  // namespace

std::optional<MinSupportCombo> min_support_row_combo(const Mat& a, std::size_t max_support) {
    if (a.empty()) return std::nullopt;
    std::size_t rows = a.size(), cols = a[0].size();
    max_support = std::min(max_support, cols);

    auto try_allowed = [&](const std::vector<std::size_t>& allowed)
        -> std::optional<MinSupportCombo> {
        // c^T A must vanish outside `allowed`: c in the kernel of the
        // transpose of A restricted to the other columns.
        Mat restr;
        restr.reserve(cols - allowed.size());
        std::vector<bool> in_allowed(cols, false);
        for (auto j : allowed) in_allowed[j] = true;
        Mat at = transpose(a);
        for (std::size_t j = 0; j < cols; ++j)
            if (!in_allowed[j]) restr.push_back(at[j]);
        Vec c;
        if (restr.empty()) {
            c.assign(rows, Rat(0));
            c[0] = 1;
        } else {
            auto ker = kernel_basis(restr);
            if (ker.empty()) return std::nullopt;
            c = canonical_direction(ker.front());
        }
        MinSupportCombo out;
        out.combo = c;
        for (std::size_t j = 0; j < cols; ++j) {
            Rat s = 0;
            for (std::size_t i = 0; i < rows; ++i) s += c[i] * a[i][j];
            if (s != 0) out.support.push_back(j);
        }
        return out;
    };

    // support size 0: left kernel of A itself
    {
        auto ker = kernel_basis(transpose(a));
        if (!ker.empty())
            return MinSupportCombo{canonical_direction(ker.front()), {}};
    }
    std::vector<std::size_t> subset;
    for (std::size_t t = 1; t <= max_support; ++t) {
        subset.assign(t, 0);
        // lexicographically ordered size-t subsets of [0, cols)
        std::iota(subset.begin(), subset.end(), 0);
        while (true) {
            if (auto hit = try_allowed(subset)) return hit;
            std::size_t i = t;
            while (i > 0) {
                --i;
                if (subset[i] != cols - t + i) break;
            }
            if (subset[i] == cols - t + i) break;
            ++subset[i];
            for (std::size_t j = i + 1; j < t; ++j) subset[j] = subset[j - 1] + 1;
        }
    }
    return std::nullopt;
}

}  // namespace oddforms::qla
