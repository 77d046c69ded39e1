#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

namespace streetcrime {

// Writes rows as a space-padded table. The first `left_columns` columns are
// left-aligned; the rest (numbers) are right-aligned.
inline void write_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& cells,
                          std::size_t left_columns) {
    std::vector<std::size_t> width;
    for (const auto& row : cells) {
        if (width.size() < row.size()) width.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const std::size_t pad = width[c] - row[c].size();
            if (c < left_columns)
                line += row[c] + (c + 1 < row.size() ? std::string(pad, ' ') : "");
            else
                line += std::string(pad, ' ') + row[c];
            if (c + 1 < row.size()) line += "  ";
        }
        out << line << '\n';
    }
}

} // namespace streetcrime
