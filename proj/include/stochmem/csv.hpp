#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stochmem {

/// Shortest round-trip decimal form, locale independent ("inf", "-inf", "nan").
std::string format_number(double v);

/// Row-oriented CSV builder; the whole document stays in memory so two runs
/// can be compared byte for byte.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& row(const std::vector<double>& values);
    CsvWriter& row(const std::vector<std::string>& cells);

    [[nodiscard]] const std::string& text() const { return text_; }
    void save(const std::filesystem::path& path) const;

private:
    std::size_t columns_;
    std::string text_;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// "# key = value" lines.
std::string format_metadata(const Metadata& meta);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace stochmem
