#pragma once

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fsrec/errors.hpp"
#include "fsrec/metrics.hpp"
#include "fsrec/tensor.hpp"
#include "fsrec/vocab.hpp"

namespace fsrec::eval {

using num::Tensor;

/// Writes a decoded word's attention weights as a comma-separated table:
/// one row per emitted symbol, one column per frame, plus the argmax frame
/// index (1-based) of each row.
inline void write_attention_csv(std::ostream& out, const std::vector<std::string>& row_labels,
                                const std::vector<Tensor>& alphas) {
    if (row_labels.size() != alphas.size()) {
        throw std::invalid_argument("attention export: label/row count mismatch");
    }
    std::size_t s = alphas.empty() ? 0 : alphas.front().size();
    out << "symbol";
    for (std::size_t i = 1; i <= s; ++i) out << ",frame_" << i;
    out << ",argmax_frame\n";
    out << std::setprecision(17);
    for (std::size_t r = 0; r < alphas.size(); ++r) {
        const Tensor& row = alphas[r];
        if (row.size() != s) throw std::invalid_argument("attention export: ragged rows");
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i] > row[argmax]) argmax = i;
        }
        out << row_labels[r];
        for (std::size_t i = 0; i < row.size(); ++i) out << "," << row[i];
        out << "," << (argmax + 1) << "\n";
    }
}

struct AttentionTable {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> argmax;  // 1-based frame indices
};

inline AttentionTable parse_attention_csv(std::istream& in) {
    AttentionTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("attention table: empty input");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3) throw DataError("attention table: malformed row '" + line + "'");
        table.labels.push_back(cells.front());
        std::vector<double> values;
        for (std::size_t i = 1; i + 1 < cells.size(); ++i) values.push_back(std::stod(cells[i]));
        table.argmax.push_back(static_cast<std::size_t>(std::stoul(cells.back())));
        table.rows.push_back(std::move(values));
    }
    return table;
}

/// Confusion counts as CSV; rows are ground-truth letters (plus the spare
/// symbol row), columns hypothesized letters (plus the missing column).
inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m, bool normalized) {
    std::size_t n = m.num_letters();
    out << (normalized ? "truth\\prob" : "truth\\count");
    for (std::size_t c = 0; c < n; ++c) out << "," << static_cast<char>('A' + c);
    out << ",<none>\n";
    out << std::setprecision(17);
    for (std::size_t r = 0; r <= n; ++r) {
        if (r < n) {
            out << static_cast<char>('A' + r);
        } else {
            out << "<none>";
        }
        if (normalized) {
            std::vector<double> row = m.row_normalized(r);
            for (double v : row) out << "," << v;
        } else {
            for (std::size_t c = 0; c <= n; ++c) out << "," << m.count(r, c);
        }
        out << "\n";
    }
}

/// Standalone SVG heatmap of a numeric grid (dark = 0, light = max).
inline void write_heatmap_svg(std::ostream& out, const std::vector<std::vector<double>>& grid,
                              const std::vector<std::string>& row_labels,
                              const std::vector<std::string>& col_labels) {
    std::size_t rows = grid.size();
    std::size_t cols = rows == 0 ? 0 : grid.front().size();
    double hi = 0.0;
    for (const auto& row : grid) {
        for (double v : row) hi = std::max(hi, v);
    }
    if (hi <= 0.0) hi = 1.0;
    const int cell = 14, margin = 64;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (margin + cols * cell + 8)
        << "\" height=\"" << (margin + rows * cell + 8) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t r = 0; r < rows; ++r) {
        if (grid[r].size() != cols) throw std::invalid_argument("heatmap: ragged grid");
        for (std::size_t c = 0; c < cols; ++c) {
            int shade = static_cast<int>(255.0 * grid[r][c] / hi);
            out << "<rect x=\"" << (margin + c * cell) << "\" y=\"" << (margin + r * cell) << "\" width=\""
                << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade << ","
                << shade << ")\"/>\n";
        }
    }
    out << "<g font-family=\"monospace\" font-size=\"10\" fill=\"black\">\n";
    for (std::size_t r = 0; r < std::min(rows, row_labels.size()); ++r) {
        out << "<text x=\"4\" y=\"" << (margin + r * cell + cell - 3) << "\">" << row_labels[r]
            << "</text>\n";
    }
    for (std::size_t c = 0; c < std::min(cols, col_labels.size()); ++c) {
        out << "<text x=\"" << (margin + c * cell) << "\" y=\"" << (margin - 6) << "\" transform=\"rotate(-60 "
            << (margin + c * cell) << " " << (margin - 6) << ")\">" << col_labels[c] << "</text>\n";
    }
    out << "</g>\n</svg>\n";
}

}  // namespace fsrec::eval
