#include "natlas/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace natlas {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw RuntimeError("short write on " + path);
}

std::string matrix_csv(const std::string& corner, const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<double>>& values) {
    std::string s = corner;
    for (const auto& c : col_labels) { s += ','; s += c; }
    s += '\n';
    for (size_t r = 0; r < row_labels.size(); r++) {
        s += row_labels[r];
        for (size_t c = 0; c < col_labels.size(); c++) { s += ','; s += num(values[r][c]); }
        s += '\n';
    }
    return s;
}

std::string heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::vector<double>>& values) {
    const int cw = 56, ch = 24, left = 90, top = 40;
    int W = left + cw * int(col_labels.size()) + 20;
    int H = top + ch * int(row_labels.size()) + 20;
    double mn = 1e300, mx = -1e300;
    for (const auto& row : values)
        for (double v : row) { mn = std::min(mn, v); mx = std::max(mx, v); }
    if (!(mx > mn)) { mx = mn + 1; }
    std::string s;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns='http://www.w3.org/2000/svg' width='%d' height='%d' "
                  "font-family='monospace' font-size='11'>\n", W, H);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x='%d' y='16' font-size='13'>%s</text>\n", left,
                  title.c_str());
    s += buf;
    for (size_t c = 0; c < col_labels.size(); c++) {
        std::snprintf(buf, sizeof buf, "<text x='%d' y='%d' text-anchor='middle'>%s</text>\n",
                      left + int(c) * cw + cw / 2, top - 6, col_labels[c].c_str());
        s += buf;
    }
    for (size_t r = 0; r < row_labels.size(); r++) {
        std::snprintf(buf, sizeof buf, "<text x='%d' y='%d' text-anchor='end'>%s</text>\n",
                      left - 6, top + int(r) * ch + ch / 2 + 4, row_labels[r].c_str());
        s += buf;
        for (size_t c = 0; c < col_labels.size(); c++) {
            double v = values[r][c];
            double t = (v - mn) / (mx - mn);
            // white (255,255,255) -> steel blue (70,110,180)
            int R = int(std::lround(255 + t * (70 - 255)));
            int G = int(std::lround(255 + t * (110 - 255)));
            int B = int(std::lround(255 + t * (180 - 255)));
            std::snprintf(buf, sizeof buf,
                          "<rect x='%d' y='%d' width='%d' height='%d' fill='rgb(%d,%d,%d)' "
                          "stroke='#999'/>\n",
                          left + int(c) * cw, top + int(r) * ch, cw, ch, R, G, B);
            s += buf;
            std::snprintf(buf, sizeof buf,
                          "<text x='%d' y='%d' text-anchor='middle' fill='%s'>%.3f</text>\n",
                          left + int(c) * cw + cw / 2, top + int(r) * ch + ch / 2 + 4,
                          t > 0.6 ? "#fff" : "#222", v);
            s += buf;
        }
    }
    s += "</svg>\n";
    return s;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    const int W = 560, H = 340, left = 56, right = 150, top = 36, bottom = 40;
    const int pw = W - left - right, ph = H - top - bottom;
    size_t n = 0;
    double mn = 1e300, mx = -1e300;
    for (const auto& [_, ys] : series) {
        n = std::max(n, ys.size());
        for (double y : ys) { mn = std::min(mn, y); mx = std::max(mx, y); }
    }
    if (n < 2) n = 2;
    if (!(mx > mn)) { mx = mn + 1e-9; }
    double pad = (mx - mn) * 0.05;
    mn -= pad;
    mx += pad;
    static const char* kPalette[] = {"#3465a4", "#cc0000", "#4e9a06", "#f57900",
                                    "#75507b", "#0e8a8a", "#8f5902", "#2e3436"};
    auto X = [&](size_t i) { return left + double(i) * pw / double(n - 1); };
    auto Y = [&](double v) { return top + (mx - v) / (mx - mn) * ph; };
    std::string s;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns='http://www.w3.org/2000/svg' width='%d' height='%d' "
                  "font-family='monospace' font-size='11'>\n", W, H);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x='%d' y='16' font-size='13'>%s</text>\n", left,
                  title.c_str());
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<rect x='%d' y='%d' width='%d' height='%d' fill='none' stroke='#555'/>\n",
                  left, top, pw, ph);
    s += buf;
    for (int g = 0; g <= 4; g++) {
        double v = mn + (mx - mn) * g / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<text x='%d' y='%.1f' text-anchor='end'>%.2f</text>\n", left - 6,
                      Y(v) + 4, v);
        s += buf;
    }
    for (size_t i = 0; i < n; i++) {
        std::snprintf(buf, sizeof buf, "<text x='%.1f' y='%d' text-anchor='middle'>%zu</text>\n",
                      X(i), H - bottom + 16, i);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "<text x='%d' y='%d' text-anchor='middle'>%s</text>\n",
                  left + pw / 2, H - 8, x_label.c_str());
    s += buf;
    for (size_t k = 0; k < series.size(); k++) {
        const auto& [name, ys] = series[k];
        const char* color = kPalette[k % 8];
        std::string pts;
        for (size_t i = 0; i < ys.size(); i++) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", X(i), Y(ys[i]));
            pts += buf;
        }
        std::snprintf(buf, sizeof buf,
                      "<polyline points='%s' fill='none' stroke='%s' stroke-width='1.5'/>\n",
                      pts.c_str(), color);
        s += buf;
        std::snprintf(buf, sizeof buf,
                      "<rect x='%d' y='%zu' width='10' height='10' fill='%s'/>"
                      "<text x='%d' y='%zu'>%s</text>\n",
                      W - right + 10, top + k * 16, color, W - right + 26, top + k * 16 + 9,
                      name.c_str());
        s += buf;
    }
    s += "</svg>\n";
    return s;
}

std::string lape_csv(const LapeTable& t) {
    std::string s = "layer,neuron,entropy,inactive,passed_filter";
    for (const auto& l : t.langs) s += ",p_" + l;
    s += '\n';
    for (size_t f = 0; f < t.n_neurons(); f++) {
        s += std::to_string(t.layer_of(f)) + ',' + std::to_string(t.neuron_of(f)) + ',' +
             num(t.entropy[f]) + ',' + (t.inactive[f] ? '1' : '0');
        s += ',';
        s += (t.passed_filter[f] ? '1' : '0');
        for (size_t l = 0; l < t.langs.size(); l++) s += ',' + num(t.p[f][l]);
        s += '\n';
    }
    return s;
}

std::string selection_sets_csv(const SelectionResult& sel) {
    std::string s = "language,layer,neuron\n";
    for (const auto& [lang, set] : sel.sets)
        for (auto [layer, j] : set.neurons)
            s += lang + ',' + std::to_string(layer) + ',' + std::to_string(j) + '\n';
    return s;
}

std::string overlap_csv(const OverlapMatrix& m) {
    std::vector<std::vector<double>> vals(m.langs.size(), std::vector<double>(m.langs.size()));
    for (size_t i = 0; i < m.langs.size(); i++)
        for (size_t j = 0; j < m.langs.size(); j++) vals[i][j] = m.count[i][j];
    return matrix_csv("lang", m.langs, m.langs, vals);
}

std::string layer_histogram_csv(const std::map<std::string, std::vector<int>>& hist,
                                int n_layers) {
    std::string s = "language";
    for (int l = 0; l < n_layers; l++) s += ",layer" + std::to_string(l);
    s += ",total\n";
    std::vector<long> colsum(n_layers, 0);
    for (const auto& [lang, v] : hist) {
        s += lang;
        long tot = 0;
        for (int l = 0; l < n_layers; l++) {
            s += ',' + std::to_string(v[l]);
            tot += v[l];
            colsum[l] += v[l];
        }
        s += ',' + std::to_string(tot) + '\n';
    }
    s += "total";
    long grand = 0;
    for (int l = 0; l < n_layers; l++) { s += ',' + std::to_string(colsum[l]); grand += colsum[l]; }
    s += ',' + std::to_string(grand) + '\n';
    return s;
}

std::string count_table_csv(const CountTable& ct) {
    std::string s = "language";
    for (double k : ct.ks) s += ',' + num(k) + '%';
    s += '\n';
    for (size_t l = 0; l < ct.langs.size(); l++) {
        s += ct.langs[l];
        for (size_t k = 0; k < ct.ks.size(); k++) s += ',' + std::to_string(ct.counts[l][k]);
        s += '\n';
    }
    return s;
}

std::string suite_csv(const ProfileSuite& su) {
    std::string s = "layer,language,target_prob,pivot_prob,entropy\n";
    for (const auto& lang : su.langs)
        for (int l = 0; l < su.n_layers; l++)
            s += std::to_string(l) + ',' + lang + ',' + fixed6(su.target_prob.at(lang)[l]) + ',' +
                 fixed6(su.pivot_prob.at(lang)[l]) + ',' + fixed6(su.entropy.at(lang)[l]) + '\n';
    for (int l = 0; l < su.n_layers; l++)
        s += std::to_string(l) + ",mean," + fixed6(su.mean_target[l]) + ",,\n";
    return s;
}

std::string forcing_matrix_csv(const ForcingReport& r) {
    return matrix_csv("src\\tgt", r.langs, r.langs, r.rate);
}

std::string forcing_cells_csv(const ForcingReport& r) {
    std::string s = "src,tgt,question,top1,success,unknown\n";
    for (const auto& c : r.cells)
        s += c.src + ',' + c.tgt + ',' + std::to_string(c.question) + ',' + c.top1 + ',' +
             (c.success ? '1' : '0') + ',' + (c.unknown ? '1' : '0') + '\n';
    return s;
}

std::string fallback_csv(const FallbackReport& r) {
    std::vector<std::string> langs;
    if (!r.steps.empty())
        for (const auto& [lang, _] : r.steps[0].distribution) langs.push_back(lang);
    std::string s = "step,deactivated,top,top_share";
    for (const auto& l : langs) s += ',' + l;
    s += '\n';
    for (size_t i = 0; i < r.steps.size(); i++) {
        const auto& st = r.steps[i];
        std::string deact;
        for (const auto& d : st.deactivated) { if (!deact.empty()) deact += '|'; deact += d; }
        s += std::to_string(i) + ',' + deact + ',' + st.top + ',' + fixed6(st.top_share);
        for (const auto& l : langs) s += ',' + fixed6(st.distribution.at(l));
        s += '\n';
    }
    return s;
}

}  // namespace natlas
