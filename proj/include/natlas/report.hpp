#pragma once

#include <map>
#include <string>
#include <vector>

#include "natlas/harness.hpp"
#include "natlas/lape.hpp"
#include "natlas/lens.hpp"

namespace natlas {

void write_text_file(const std::string& path, const std::string& content);

// Generic builders. All numeric output goes through fixed snprintf formats so
// identical inputs give identical bytes.
std::string matrix_csv(const std::string& corner, const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<double>>& values);

// Linear min→max color scale (white to steel blue), one cell per value, value
// text inside.
std::string heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::vector<double>>& values);

// One polyline per series over x = 0..n-1 (layers), auto y range, legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series);

// Module-specific flat files.
std::string lape_csv(const LapeTable& t);
std::string selection_sets_csv(const SelectionResult& sel);
std::string overlap_csv(const OverlapMatrix& m);
std::string layer_histogram_csv(const std::map<std::string, std::vector<int>>& hist, int n_layers);
std::string count_table_csv(const CountTable& ct);  // languages x k%-columns
std::string suite_csv(const ProfileSuite& s);
std::string forcing_matrix_csv(const ForcingReport& r);
std::string forcing_cells_csv(const ForcingReport& r);
std::string fallback_csv(const FallbackReport& r);

}  // namespace natlas
