#pragma once

// Deterministic CSV and SVG writers. Numbers go through std::to_chars, so
// output bytes never depend on the locale.

#include "tsgame/linalg.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsgame {

/// Column table keyed by a leading time column. NaNs are written as empty
/// fields; rows are thinned to every `every`-th one plus the last.
class CsvTable {
public:
    explicit CsvTable(Vec time) : time_(std::move(time)) {}

    void add(std::string name, Vec values);
    std::string str(std::size_t every = 1) const;
    void write(const std::filesystem::path& path, std::size_t every = 1) const;

    const Vec& time() const { return time_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Vec>& columns() const { return columns_; }

private:
    Vec time_;
    std::vector<std::string> names_;
    std::vector<Vec> columns_;
};

/// Reads a table written by CsvTable (first column is time).
CsvTable read_csv(const std::filesystem::path& path);

struct PlotSeries {
    std::string label;
    Vec x;
    Vec y;
    Vec lower;  ///< band, empty for none
    Vec upper;
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Self-contained SVG: axes, ticks, legend, one polyline per series and a
/// filled band polygon where lower/upper are given. NaN points split lines.
std::string render_svg(const PlotSpec& plot);
void emit_svg(const std::filesystem::path& path, const PlotSpec& plot);

/// Plot of a CsvTable: every mean_<q> column with lower_<q>/upper_<q>
/// becomes a banded line, other non-statistic columns plain lines.
PlotSpec plot_from_table(const CsvTable& table, const std::string& title);

/// Writes bytes verbatim (binary mode, LF line endings preserved).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tsgame
