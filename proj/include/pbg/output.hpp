#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pbg {

// 9 significant digits, the frozen CSV float format.
std::string format_number(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);

    void row(const std::vector<double>& values);
    // Numbers followed by trailing text cells.
    void row(const std::vector<double>& values, const std::vector<std::string>& text);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_; }
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::string body_;
    std::size_t rows_ = 0;
};

struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Throws ConfigError with row/column position on malformed input.
CsvData read_csv(const std::filesystem::path& path);

// SHA-1 over "blob <size>\0<content>", as git hashes file contents.
std::string git_blob_sha1(std::string_view content);

void write_file(const std::filesystem::path& path, std::string_view content);

// Sidecar describing one emitted file.
nlohmann::json sidecar(const std::string& file, const std::string& content, const std::vector<std::string>& columns,
                       std::size_t rows, const nlohmann::json& config, const nlohmann::json& parameters);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series);

// z is x-major: z[i * y.size() + j] belongs to (x[i], y[j]).
std::string svg_heatmap(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                        const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& z,
                        const std::string& zlabel);

}  // namespace pbg
