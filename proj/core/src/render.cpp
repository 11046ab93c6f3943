#include "hmarl/render.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

#include "hmarl/errors.hpp"

namespace hmarl {

namespace {

constexpr int kCell = 44;
constexpr int kLeft = 90;
constexpr int kTop = 56;
constexpr const char* kEmptyColor = "#e0e0e0";

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string file_token(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return out;
}

}  // namespace

const char* mode_color(Mode m) noexcept {
    switch (m) {
        case Mode::Attack: return "#d62728";
        case Mode::Engage: return "#1f77b4";
        case Mode::Defend: return "#2ca02c";
    }
    return kEmptyColor;
}

std::vector<SvgFile> render_heatmaps(const ExplanationGrid& grid, const std::string& slice_axis) {
    if (grid.cell_count() == 0) fail(ErrorKind::InvalidInput, "grid has no cells");
    int slice = -1;
    for (int a = 0; a < 3; ++a)
        if (grid.axes[static_cast<std::size_t>(a)].name == slice_axis) slice = a;
    if (slice < 0) fail(ErrorKind::InvalidInput, "grid has no axis named '" + slice_axis + "'");
    const int row_axis = slice == 0 ? 1 : 0;
    const int col_axis = slice == 2 ? 1 : 2;
    const auto& S = grid.axes[static_cast<std::size_t>(slice)];
    const auto& R = grid.axes[static_cast<std::size_t>(row_axis)];
    const auto& C = grid.axes[static_cast<std::size_t>(col_axis)];

    const int width = kLeft + static_cast<int>(C.size()) * kCell + 150;
    const int height = kTop + static_cast<int>(R.size()) * kCell + 60;

    std::vector<SvgFile> files;
    for (std::size_t s = 0; s < S.size(); ++s) {
        std::ostringstream o;
        o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
          << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        o << "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\">"
             "<path d=\"M0,6 L6,0\" stroke=\"#000000\" stroke-width=\"1\"/></pattern></defs>\n";
        o << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
        o << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << escape(grid.kind) << " grid, "
          << escape(S.name) << " = " << escape(S.label(s)) << "</text>\n";
        o << "<text x=\"" << kLeft << "\" y=\"" << kTop - 22 << "\">" << escape(C.name) << "</text>\n";
        o << "<text x=\"8\" y=\"" << kTop + 12 << "\">" << escape(R.name) << "</text>\n";
        for (std::size_t c = 0; c < C.size(); ++c)
            o << "<text x=\"" << kLeft + static_cast<int>(c) * kCell + kCell / 2 << "\" y=\"" << kTop - 6
              << "\" text-anchor=\"middle\">" << escape(C.label(c)) << "</text>\n";
        for (std::size_t r = 0; r < R.size(); ++r) {
            const int y = kTop + static_cast<int>(r) * kCell;
            o << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + kCell / 2 + 4 << "\" text-anchor=\"end\">"
              << escape(R.label(r)) << "</text>\n";
            for (std::size_t c = 0; c < C.size(); ++c) {
                std::array<std::size_t, 3> idx{};
                idx[static_cast<std::size_t>(slice)] = s;
                idx[static_cast<std::size_t>(row_axis)] = r;
                idx[static_cast<std::size_t>(col_axis)] = c;
                const auto cell = grid.flat_index(idx[0], idx[1], idx[2]);
                const auto am = grid.argmax(cell);
                const int x = kLeft + static_cast<int>(c) * kCell;
                o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
                  << "\" fill=\"" << (am ? mode_color(*am) : kEmptyColor) << "\" stroke=\"#ffffff\"/>\n";
                if (grid.tie(cell))
                    o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
                      << "\" fill=\"url(#hatch)\" class=\"tie\"/>\n";
                if (am) {
                    const auto n = grid.samples(cell);
                    const auto top = grid.counts[cell][static_cast<std::size_t>(*am)];
                    char pct[16];
                    std::snprintf(pct, sizeof pct, "%d%%", static_cast<int>((100 * top + n / 2) / n));
                    o << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
                      << "\" text-anchor=\"middle\" fill=\"#ffffff\">" << pct << "</text>\n";
                }
            }
        }
        const int lx = kLeft + static_cast<int>(C.size()) * kCell + 20;
        int ly = kTop;
        for (auto m : {Mode::Attack, Mode::Engage, Mode::Defend}) {
            o << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" fill=\"" << mode_color(m)
              << "\"/><text x=\"" << lx + 20 << "\" y=\"" << ly + 11 << "\">" << to_string(m) << "</text>\n";
            ly += 20;
        }
        o << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" fill=\"" << kEmptyColor
          << "\"/><text x=\"" << lx + 20 << "\" y=\"" << ly + 11 << "\">no data</text>\n";
        ly += 20;
        o << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"14\" fill=\"url(#hatch)\" "
             "stroke=\"#000000\"/><text x=\""
          << lx + 20 << "\" y=\"" << ly + 11 << "\">tie</text>\n";
        o << "</svg>\n";
        files.push_back({grid.kind + "_" + file_token(S.name) + "_" + std::to_string(s) + "_" + file_token(S.label(s)) +
                             ".svg",
                         o.str()});
    }
    return files;
}

}  // namespace hmarl
