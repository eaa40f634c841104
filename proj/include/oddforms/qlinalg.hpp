#pragma once

#include "oddforms/forms.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace oddforms::qla {

using Vec = std::vector<Rat>;
using Mat = std::vector<Vec>;  // row major

std::size_t rank(Mat a);

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(Mat& a);

// Any solution of A x = b, or nullopt when inconsistent.
std::optional<Vec> solve(const Mat& a, const Vec& b);

std::vector<Vec> kernel_basis(const Mat& a);

// Scales a rational vector to primitive integer entries with the first
// non-zero entry positive.
Vec canonical_direction(const Vec& v);

struct MinSupportCombo {
    Vec combo;                        // c with |support(c^T A)| minimal
    std::vector<std::size_t> support; // columns where c^T A is non-zero
};

// Smallest-support non-trivial combination of the rows of A, searched by
// ascending support size up to max_support (inclusive). Support size 0 means
// the rows are linearly dependent.
std::optional<MinSupportCombo> min_support_row_combo(const Mat& a, std::size_t max_support);

}  // namespace oddforms::qla
