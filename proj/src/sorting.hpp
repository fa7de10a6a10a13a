#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <iterator>

namespace qttlab::detail {

// Insertion sort for sequences that are already almost in order (small local
// disorder from jitter or dispersion); hands over to std::sort once the work
// exceeds a few moves per element.
template <class It, class Less = std::less<>>
void sort_nearly(It first, It last, Less less = {})
{
    const auto n = static_cast<std::size_t>(std::distance(first, last));
    std::size_t budget = 8 * n + 64;
    for (It i = first; i != last; ++i) {
        if (i == first || !less(*i, *std::prev(i))) continue;
        auto v = std::move(*i);
        It j = i;
        do {
            *j = std::move(*std::prev(j));
            --j;
            if (budget-- == 0) {
                *j = std::move(v);
                std::sort(first, last, less);
                return;
            }
        } while (j != first && less(v, *std::prev(j)));
        *j = std::move(v);
    }
}

}  // namespace qttlab::detail
