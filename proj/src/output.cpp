#include "pbg/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "pbg/common.hpp"

namespace pbg {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0 so reruns cannot differ by sign of zero
    return fmt::format("{:.9g}", v);
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::row(const std::vector<double>& values) { row(values, {}); }

void CsvWriter::row(const std::vector<double>& values, const std::vector<std::string>& text) {
    if (values.size() + text.size() != columns_.size()) throw std::logic_error("CSV row width does not match header");
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) line += ',';
        line += format_number(values[i]);
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!values.empty() || i) line += ',';
        line += text[i];
    }
    body_ += line;
    body_ += '\n';
    ++rows_;
}

std::string CsvWriter::str() const {
    std::string head;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) head += ',';
        head += columns_[i];
    }
    return head + '\n' + body_;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto a = cell.find_first_not_of(" \t\r");
        const auto b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    CsvData data;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
    data.columns = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != data.columns.size())
            throw ConfigError(fmt::format("{}: row {} has {} cells, header has {}", path.string(), lineno, cells.size(),
                                          data.columns.size()));
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto& s = cells[c];
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw ConfigError(fmt::format("{}: row {} column {} ('{}'): '{}' is not a number", path.string(), lineno,
                                              c + 1, data.columns[c], s));
            row.push_back(v);
        }
        data.rows.push_back(std::move(row));
    }
    return data;
}

std::string git_blob_sha1(std::string_view content) {
    const std::string head = "blob " + std::to_string(content.size()) + '\0';
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) && EVP_DigestUpdate(ctx, head.data(), head.size()) &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) && EVP_DigestFinal_ex(ctx, md.data(), &len);
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error("SHA-1 digest failed");
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
}

nlohmann::json sidecar(const std::string& file, const std::string& content, const std::vector<std::string>& columns,
                       std::size_t rows, const nlohmann::json& config, const nlohmann::json& parameters) {
    return {{"file", file},   {"columns", columns}, {"rows", rows},
            {"sha1", git_blob_sha1(content)}, {"config", config}, {"parameters", parameters}};
}

namespace {

constexpr double kW = 720, kH = 480, kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
    double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

void widen(double& a, double& b) {
    if (!(b > a)) {
        const double pad = std::max(1e-9, std::abs(a) * 0.05);
        a -= pad;
        b += pad;
    }
}

std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kW, kH);
    s += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", kW / 2, esc(title));
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
                     kW - kLeft - kRight, kH - kTop - kBottom);
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", f.px(xv), kH - kBottom + 18, xv);
        s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 6, f.py(yv) + 4, yv);
    }
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kW / 2, kH - 14, esc(xl));
    s += fmt::format("<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n", kH / 2,
                     kH / 2, esc(yl));
    return s;
}

// Viridis, five anchors.
std::string colour(double t) {
    static const double a[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double u = t - i;
    auto ch = [&](int c) { return static_cast<int>(std::lround(a[i][c] + u * (a[i + 1][c] - a[i][c]))); };
    return fmt::format("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2));
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                x0 = std::min(x0, s.x[i]);
                x1 = std::max(x1, s.x[i]);
                y0 = std::min(y0, s.y[i]);
                y1 = std::max(y1, s.y[i]);
            }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    widen(x0, x1);
    widen(y0, y1);
    const Frame f{x0, x1, y0, y1};
    std::string s = axes(f, title, xlabel, ylabel);
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        std::string pts;
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            if (std::isfinite(sr.x[i]) && std::isfinite(sr.y[i]))
                pts += fmt::format("{:.1f},{:.1f} ", f.px(sr.x[i]), f.py(sr.y[i]));
        const char* col = palette[k % 6];
        s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", col, pts);
        s += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + 10, kTop + 16 + 14 * k, col,
                         esc(sr.label));
    }
    return s + "</svg>\n";
}

std::string svg_heatmap(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                        const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& z,
                        const std::string& zlabel) {
    if (x.empty() || y.empty() || z.size() != x.size() * y.size()) throw std::logic_error("heatmap shape mismatch");
    double x0 = x.front(), x1 = x.back(), y0 = y.front(), y1 = y.back();
    widen(x0, x1);
    widen(y0, y1);
    double z0 = INFINITY, z1 = -INFINITY;
    for (double v : z)
        if (std::isfinite(v)) z0 = std::min(z0, v), z1 = std::max(z1, v);
    if (!std::isfinite(z0)) z0 = 0, z1 = 1;
    widen(z0, z1);
    const Frame f{x0, x1, y0, y1};
    std::string s = axes(f, title + " (" + zlabel + fmt::format(": {:.3g} to {:.3g})", z0, z1), xlabel, ylabel);
    // Cap drawn cells so large grids stay a reasonable file size.
    const std::size_t nx = std::min<std::size_t>(x.size(), 200), ny = std::min<std::size_t>(y.size(), 200);
    const double cw = (kW - kLeft - kRight) / nx, chh = (kH - kTop - kBottom) / ny;
    for (std::size_t a = 0; a < nx; ++a)
        for (std::size_t b = 0; b < ny; ++b) {
            const std::size_t i = a * x.size() / nx, j = b * y.size() / ny;
            const double v = z[i * y.size() + j];
            s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                             kLeft + a * cw, kH - kBottom - (b + 1) * chh, cw + 0.05, chh + 0.05,
                             colour((v - z0) / (z1 - z0)));
        }
    return s + "</svg>\n";
}

}  // namespace pbg
