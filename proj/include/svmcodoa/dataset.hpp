#pragma once

// Delimited classification data: manifest parsing, loading (CSV,
// whitespace, ARFF), seeded splitting, and preprocessing fitted on the
// training split only (mean/mode imputation, categorical encoding,
// min-max scaling to [0, 1]).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/kernel.hpp"
#include "svmcodoa/rng.hpp"

namespace svmcodoa {

/// Malformed or inconsistent input data (maps to CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

namespace text {

inline std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(delim, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline long long parse_int(std::string_view s, std::string_view what) {
    s = trim(s);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
    return v;
}

/// Comma-separated integer list ("1, 3,5").
inline std::vector<long long> parse_int_list(std::string_view s, std::string_view what) {
    std::vector<long long> out;
    if (trim(s).empty()) return out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_int(tok, what));
    return out;
}

}  // namespace text

enum class Delimiter { comma, whitespace };
enum class ColumnKind { numeric, categorical, ignore };

/// Declarative description of one dataset.
///
/// File format: one `key = value` pair per line, `#` starts a comment.
///
///   name          = hepatitis
///   file          = hepatitis.data      # single file, split by counts
///   train_file    = ann-train.data      # or: separate train/test files
///   test_file     = ann-test.data
///   delimiter     = comma               # comma | whitespace
///   missing       = ?                   # missing-value marker
///   label_column  = 0                   # 0-based; negative counts from the end
///   header        = none                # none | arff | <n> lines to skip
///   categorical   = 2,3,4               # column indices (default: numeric)
///   ignore        = 7                   # column indices to drop
///   split         = 100/55              # train/test counts for single-file data
///   split_seed    = 1                   # default seed of the shuffle
///
/// Relative paths are resolved against the manifest's directory.
struct DatasetManifest {
    std::string name;
    std::filesystem::path file;
    std::filesystem::path train_file;
    std::filesystem::path test_file;
    Delimiter delimiter = Delimiter::comma;
    std::string missing_marker = "?";
    long long label_column = -1;
    bool arff = false;
    std::size_t skip_lines = 0;
    std::vector<long long> categorical;
    std::vector<long long> ignored;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::uint64_t split_seed = 1;

    bool separate_files() const { return !train_file.empty(); }

    void validate() const {
        if (separate_files() == !file.empty())
            throw ConfigError("manifest '" + name + "': give either file or train_file/test_file");
        if (separate_files() && test_file.empty()) throw ConfigError("manifest '" + name + "': test_file missing");
        if (!separate_files() && (train_count == 0 || test_count == 0))
            throw ConfigError("manifest '" + name + "': split = <train>/<test> required for single-file data");
    }

    static DatasetManifest parse(std::istream& in, const std::filesystem::path& base_dir = {}) {
        DatasetManifest m;
        std::string line;
        std::size_t line_no = 0;
        auto resolve = [&](std::string_view v) {
            std::filesystem::path p{std::string(v)};
            return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        };
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view s = line;
            if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
            s = text::trim(s);
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("manifest line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = text::lower(text::trim(s.substr(0, eq)));
            const std::string_view value = text::trim(s.substr(eq + 1));
            if (key == "name") m.name = value;
            else if (key == "file") m.file = resolve(value);
            else if (key == "train_file") m.train_file = resolve(value);
            else if (key == "test_file") m.test_file = resolve(value);
            else if (key == "delimiter") {
                const auto v = text::lower(value);
                if (v == "comma" || v == ",") m.delimiter = Delimiter::comma;
                else if (v == "whitespace" || v == "space") m.delimiter = Delimiter::whitespace;
                else throw ConfigError("manifest line " + std::to_string(line_no) + ": unknown delimiter '" + v + "'");
            } else if (key == "missing") m.missing_marker = value;
            else if (key == "label_column") m.label_column = text::parse_int(value, "label_column");
            else if (key == "header") {
                const auto v = text::lower(value);
                if (v == "arff") m.arff = true;
                else if (v != "none") m.skip_lines = static_cast<std::size_t>(text::parse_int(v, "header"));
            } else if (key == "categorical") m.categorical = text::parse_int_list(value, "categorical");
            else if (key == "ignore") m.ignored = text::parse_int_list(value, "ignore");
            else if (key == "split") {
                const auto slash = value.find('/');
                if (slash == std::string_view::npos) throw ConfigError("manifest: split must be <train>/<test>");
                m.train_count = static_cast<std::size_t>(text::parse_int(value.substr(0, slash), "split"));
                m.test_count = static_cast<std::size_t>(text::parse_int(value.substr(slash + 1), "split"));
            } else if (key == "split_seed") m.split_seed = static_cast<std::uint64_t>(text::parse_int(value, "split_seed"));
            else throw ConfigError("manifest line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        m.validate();
        return m;
    }

    static DatasetManifest load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open manifest " + path.string());
        try {
            return parse(in, path.parent_path());
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
};

/// Parsed cells; std::nullopt marks a missing value.
struct RawTable {
    std::vector<std::vector<std::optional<std::string>>> rows;
    /// 1-based source line of each row.
    std::vector<std::size_t> line_numbers;
    std::string source;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t columns() const noexcept { return rows.empty() ? 0 : rows.front().size(); }

    RawTable subset(std::span<const std::size_t> idx) const {
        RawTable t;
        t.source = source;
        for (std::size_t i : idx) {
            t.rows.push_back(rows[i]);
            t.line_numbers.push_back(line_numbers[i]);
        }
        return t;
    }
};

/// Parse delimited text. Empty cells and cells equal to the missing
/// marker are missing. A single trailing empty field (stray delimiter at
/// end of line) is dropped.
inline RawTable parse_table(std::istream& in, const DatasetManifest& m, const std::string& source = "<stream>") {
    RawTable t;
    t.source = source;
    std::string line;
    std::size_t line_no = 0;
    bool in_data = !m.arff;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= m.skip_lines) continue;
        const std::string_view s = text::trim(line);
        if (s.empty()) continue;
        if (m.arff) {
            if (s.front() == '%') continue;
            if (s.front() == '@') {
                if (text::lower(s.substr(0, 5)) == "@data") in_data = true;
                continue;
            }
        }
        if (!in_data) continue;
        auto cells = m.delimiter == Delimiter::comma ? text::split(s, ',') : text::split_whitespace(s);
        if (width == 0) width = cells.size();
        if (cells.size() == width + 1 && cells.back().empty()) cells.pop_back();
        if (cells.size() != width)
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " fields, found " + std::to_string(cells.size()));
        std::vector<std::optional<std::string>> row;
        row.reserve(cells.size());
        for (auto& c : cells) {
            if (c.empty() || c == m.missing_marker) row.emplace_back(std::nullopt);
            else row.emplace_back(std::move(c));
        }
        t.rows.push_back(std::move(row));
        t.line_numbers.push_back(line_no);
    }
    return t;
}

inline RawTable load_table(const std::filesystem::path& path, const DatasetManifest& m) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read data file " + path.string());
    return parse_table(in, m, path.string());
}

/// Raw tables for a manifest: one table for single-file data, or the
/// train table followed by the test table.
struct LoadedData {
    RawTable train_or_all;
    std::optional<RawTable> test;
};

inline LoadedData load(const DatasetManifest& m) {
    m.validate();
    if (m.separate_files()) return {load_table(m.train_file, m), load_table(m.test_file, m)};
    return {load_table(m.file, m), std::nullopt};
}

// ---------------------------------------------------------------------------
// Splitting

inline std::size_t resolve_column(long long col, std::size_t width) {
    const long long w = static_cast<long long>(width);
    const long long c = col < 0 ? w + col : col;
    if (c < 0 || c >= w) throw DataError("column index " + std::to_string(col) + " out of range for " +
                                         std::to_string(width) + " columns");
    return static_cast<std::size_t>(c);
}

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    /// Shuffle attempt that succeeded (0 = first).
    std::size_t attempt = 0;
};

/// Seeded shuffle into train_count + test_count rows. If a label is
/// missing from the training part, reshuffle with the next sub-seed, up to
/// 100 attempts.
inline SplitIndices split_rows(const RawTable& table, std::size_t label_col, std::size_t train_count,
                               std::size_t test_count, std::uint64_t seed) {
    if (train_count == 0 || test_count == 0) throw DataError("split: counts must be positive");
    if (train_count + test_count > table.size())
        throw DataError("split: " + std::to_string(train_count) + "+" + std::to_string(test_count) +
                        " rows requested but " + table.source + " has " + std::to_string(table.size()));
    std::set<std::string> all_labels;
    for (const auto& r : table.rows) {
        if (!r[label_col]) throw DataError(table.source + ": missing class label");
        all_labels.insert(*r[label_col]);
    }
    constexpr std::size_t max_attempts = 100;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<std::size_t> idx(table.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        Rng rng = Rng::stream(seed, attempt);
        shuffle(idx.begin(), idx.end(), rng);
        SplitIndices s;
        s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_count));
        s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_count),
                      idx.begin() + static_cast<std::ptrdiff_t>(train_count + test_count));
        s.attempt = attempt;
        std::set<std::string> seen;
        for (std::size_t i : s.train) seen.insert(*table.rows[i][label_col]);
        if (seen == all_labels) return s;
    }
    throw DataError("split: some class never reached the training split after 100 shuffles");
}

// ---------------------------------------------------------------------------
// Preprocessing

/// Statistics fitted on the training split for one source column.
struct ColumnStats {
    std::size_t source_column = 0;
    ColumnKind kind = ColumnKind::numeric;
    double mean = 0.0;  // numeric imputation value
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> levels;  // categorical, sorted
    std::string mode;                 // categorical imputation value
    bool one_hot = false;

    std::size_t width() const { return kind == ColumnKind::categorical && one_hot ? levels.size() : 1; }
};

struct Dataset {
    Matrix features;
    std::vector<std::size_t> labels;
    std::vector<std::string> class_names;
    /// Source attributes used (before one-hot expansion).
    std::size_t n_attributes = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t n_classes() const noexcept { return class_names.size(); }
};

/// Fitted preprocessing; apply() maps raw rows to features in [0, 1].
class Preprocessor {
public:
    static Preprocessor fit(const RawTable& train, const DatasetManifest& m) {
        if (train.size() == 0) throw DataError("prepare: empty training table");
        Preprocessor p;
        const std::size_t width = train.columns();
        p.label_col_ = resolve_column(m.label_column, width);
        std::set<std::size_t> cat, ign;
        for (long long c : m.categorical) cat.insert(resolve_column(c, width));
        for (long long c : m.ignored) ign.insert(resolve_column(c, width));
        p.width_ = width;

        std::set<std::string> labels;
        for (std::size_t r = 0; r < train.size(); ++r) {
            const auto& cell = train.rows[r][p.label_col_];
            if (!cell) throw DataError(train.source + ":" + std::to_string(train.line_numbers[r]) + ": missing class label");
            labels.insert(*cell);
        }
        p.class_names_.assign(labels.begin(), labels.end());

        for (std::size_t c = 0; c < width; ++c) {
            if (c == p.label_col_ || ign.count(c)) continue;
            ColumnStats st;
            st.source_column = c;
            st.kind = cat.count(c) ? ColumnKind::categorical : ColumnKind::numeric;
            if (st.kind == ColumnKind::numeric) p.fit_numeric(train, st);
            else p.fit_categorical(train, st);
            p.columns_.push_back(std::move(st));
        }
        return p;
    }

    Dataset apply(const RawTable& t) const {
        Dataset d;
        d.class_names = class_names_;
        d.n_attributes = columns_.size();
        std::size_t out_width = 0;
        for (const auto& st : columns_) out_width += st.width();
        d.features = Matrix(t.size(), out_width);
        for (std::size_t r = 0; r < t.size(); ++r) {
            const auto& row = t.rows[r];
            const std::string where = t.source + ":" + std::to_string(t.line_numbers[r]);
            if (row.size() != width_)
                throw DataError(where + ": expected " + std::to_string(width_) + " fields, found " +
                                std::to_string(row.size()));
            const auto& label = row[label_col_];
            if (!label) throw DataError(where + ": missing class label");
            const auto it = std::lower_bound(class_names_.begin(), class_names_.end(), *label);
            if (it == class_names_.end() || *it != *label)
                throw DataError(where + ": class '" + *label + "' does not occur in the training data");
            d.labels.push_back(static_cast<std::size_t>(it - class_names_.begin()));

            auto out = d.features.row(r);
            std::size_t k = 0;
            for (const auto& st : columns_) {
                const auto& cell = row[st.source_column];
                if (st.kind == ColumnKind::numeric) {
                    double v = st.mean;
                    if (cell) {
                        const auto parsed = text::parse_double(*cell);
                        if (!parsed)
                            throw DataError(where + ": column " + std::to_string(st.source_column) +
                                            ": not a number: '" + *cell + "'");
                        v = *parsed;
                    }
                    out[k++] = scale(st, v);
                } else {
                    const std::string& level = cell ? *cell : st.mode;
                    const auto lv = std::lower_bound(st.levels.begin(), st.levels.end(), level);
                    if (lv == st.levels.end() || *lv != level)
                        throw DataError(where + ": column " + std::to_string(st.source_column) +
                                        ": unknown categorical level '" + level + "'");
                    const auto idx = static_cast<std::size_t>(lv - st.levels.begin());
                    if (st.one_hot) {
                        for (std::size_t j = 0; j < st.levels.size(); ++j) out[k + j] = j == idx ? 1.0 : 0.0;
                        k += st.levels.size();
                    } else {
                        out[k++] = st.levels.size() == 2 ? static_cast<double>(idx) : 0.0;
                    }
                }
            }
        }
        return d;
    }

    const std::vector<ColumnStats>& columns() const noexcept { return columns_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// (v - min) / (max - min) clamped to [0, 1]; constant columns map to 0.
    static double scale(const ColumnStats& st, double v) {
        if (!(st.max > st.min)) return 0.0;
        return std::clamp((v - st.min) / (st.max - st.min), 0.0, 1.0);
    }

private:
    void fit_numeric(const RawTable& train, ColumnStats& st) {
        double sum = 0.0;
        std::size_t n = 0;
        bool first = true;
        for (std::size_t r = 0; r < train.size(); ++r) {
            const auto& cell = train.rows[r][st.source_column];
            if (!cell) continue;
            const auto v = text::parse_double(*cell);
            if (!v)
                throw DataError(train.source + ":" + std::to_string(train.line_numbers[r]) + ": column " +
                                std::to_string(st.source_column) + ": not a number: '" + *cell + "'");
            sum += *v;
            ++n;
            st.min = first ? *v : std::min(st.min, *v);
            st.max = first ? *v : std::max(st.max, *v);
            first = false;
        }
        if (n == 0) throw DataError("prepare: column " + std::to_string(st.source_column) + " is entirely missing");
        st.mean = sum / static_cast<double>(n);
        if (!(st.max > st.min))
            warnings_.push_back("column " + std::to_string(st.source_column) + " has zero variance; mapped to 0");
    }

    void fit_categorical(const RawTable& train, ColumnStats& st) {
        std::map<std::string, std::size_t> counts;
        for (const auto& row : train.rows)
            if (const auto& cell = row[st.source_column]) ++counts[*cell];
        if (counts.empty())
            throw DataError("prepare: column " + std::to_string(st.source_column) + " is entirely missing");
        std::size_t best = 0;
        for (const auto& [level, n] : counts) {
            st.levels.push_back(level);
            if (n > best) {
                best = n;
                st.mode = level;
            }
        }
        st.one_hot = st.levels.size() > 2;
        if (st.levels.size() == 1)
            warnings_.push_back("column " + std::to_string(st.source_column) + " has a single level; mapped to 0");
    }

    std::size_t label_col_ = 0;
    std::size_t width_ = 0;
    std::vector<std::string> class_names_;
    std::vector<ColumnStats> columns_;
    std::vector<std::string> warnings_;
};

struct PreparedData {
    Dataset train;
    Dataset test;
    Preprocessor preprocessor;
    std::uint64_t split_seed = 0;
    /// Shuffle attempt used (single-file data only).
    std::size_t split_attempt = 0;
};

/// Fit on `train`, apply to both.
inline PreparedData prepare(const RawTable& train, const RawTable& test, const DatasetManifest& m) {
    PreparedData out;
    out.preprocessor = Preprocessor::fit(train, m);
    out.train = out.preprocessor.apply(train);
    out.test = out.preprocessor.apply(test);
    return out;
}

/// Split (when needed) and prepare already-loaded tables.
inline PreparedData split_and_prepare(const LoadedData& data, const DatasetManifest& m, std::uint64_t split_seed) {
    if (data.test) return prepare(data.train_or_all, *data.test, m);
    const std::size_t label_col = resolve_column(m.label_column, data.train_or_all.columns());
    const SplitIndices s = split_rows(data.train_or_all, label_col, m.train_count, m.test_count, split_seed);
    PreparedData out = prepare(data.train_or_all.subset(s.train), data.train_or_all.subset(s.test), m);
    out.split_seed = split_seed;
    out.split_attempt = s.attempt;
    return out;
}

inline PreparedData load_prepared(const DatasetManifest& m, std::uint64_t split_seed) {
    return split_and_prepare(load(m), m, split_seed);
}

inline PreparedData load_prepared(const DatasetManifest& m) { return load_prepared(m, m.split_seed); }

}  // namespace svmcodoa
