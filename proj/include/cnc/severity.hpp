#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cnc {

/// Five-level parameter tables for the corruption registry.
///
/// Text format, one table per line:
///
///     # comment
///     op = v1 v2 v3 v4 v5          primary parameter of `op`
///     op.aux = v1 v2 v3 v4 v5      named secondary parameter
///
/// Image defaults follow the CIFAR-10-C settings of the common corruption
/// benchmark (Hendrycks & Dietterich), except where a parameter has no
/// equivalent here (pixelate uses block sizes, elastic_transform uses
/// fractions of the image size). Point-op values are in data units.
inline constexpr std::string_view kDefaultSeverityTable = R"(# corruption severity tables: key = severity 1..5
gaussian_noise = 0.04 0.06 0.08 0.09 0.10
shot_noise = 500 250 100 75 50
speckle_noise = 0.06 0.10 0.12 0.16 0.20
defocus_blur = 0.3 0.4 0.5 1.0 1.5
defocus_blur.alias = 0.4 0.5 0.6 0.2 0.1
motion_blur = 1.0 1.5 2.0 2.5 3.0
motion_blur.radius = 10 10 10 10 12
contrast = 0.75 0.50 0.40 0.30 0.15
fog = 0.20 0.50 0.75 1.00 1.50
fog.decay = 3.0 3.0 2.5 2.0 1.75
elastic_transform = 0.10 0.20 0.30 0.40 0.50
elastic_transform.sigma = 0.05 0.05 0.05 0.05 0.05
jpeg_quantize = 80 65 58 50 40
pixelate = 2 3 4 5 6
jitter = 0.05 0.10 0.15 0.20 0.30
scale_warp = 1.25 1.50 1.75 2.00 2.50
)";

class SeverityTable {
public:
  using Row = std::array<double, 5>;

  static SeverityTable parse(std::string_view text) {
    SeverityTable table;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = std::min(text.find('\n', start), text.size());
      std::string_view line = text.substr(start, end - start);
      ++line_no;
      start = end + 1;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) {
        if (end == text.size()) {
          break;
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw std::invalid_argument("severity table line " + std::to_string(line_no) +
                                    ": expected 'key = v1 .. v5'");
      }
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) {
        throw std::invalid_argument("severity table line " + std::to_string(line_no) + ": empty key");
      }
      std::string_view rest = trim(line.substr(eq + 1));
      Row row{};
      std::size_t n = 0;
      while (!rest.empty()) {
        const std::size_t sp = rest.find_first_of(" \t");
        const std::string_view tok = rest.substr(0, sp);
        if (n == 5) {
          throw std::invalid_argument("severity table line " + std::to_string(line_no) +
                                      ": more than 5 values");
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
          throw std::invalid_argument("severity table line " + std::to_string(line_no) +
                                      ": bad number '" + std::string(tok) + "'");
        }
        row[n++] = v;
        rest = sp == std::string_view::npos ? std::string_view{} : trim(rest.substr(sp));
      }
      if (n != 5) {
        throw std::invalid_argument("severity table line " + std::to_string(line_no) +
                                    ": expected exactly 5 values");
      }
      table.rows_[key] = row;
      if (end == text.size()) {
        break;
      }
    }
    return table;
  }

  static const SeverityTable& defaults() {
    static const SeverityTable table = parse(kDefaultSeverityTable);
    return table;
  }

  bool has(const std::string& key) const { return rows_.contains(key); }

  /// Value of `key` ("op" or "op.aux") at severity 1..5.
  double at(const std::string& key, int severity) const {
    if (severity < 1 || severity > 5) {
      throw std::invalid_argument("severity must be in 1..5");
    }
    const auto it = rows_.find(key);
    if (it == rows_.end()) {
      throw std::out_of_range("severity table has no entry '" + key + "'");
    }
    return it->second[static_cast<std::size_t>(severity - 1)];
  }

  void set(const std::string& key, const Row& row) { rows_[key] = row; }

  const std::map<std::string, Row>& rows() const { return rows_; }

  friend bool operator==(const SeverityTable&, const SeverityTable&) = default;

private:
  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
      return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, Row> rows_;
};

}  // namespace cnc
