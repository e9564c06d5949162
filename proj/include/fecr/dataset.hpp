#pragma once

// Count dataset ingestion and validation. Counts are held at raw (chamber)
// scale together with per-sample analytical sensitivities f; the epg view is
// raw * f. CSV input accepts either raw counts or epg values; epg values that
// are not multiples of f are rejected rather than rounded.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fecr {

enum class Design { paired, unpaired };

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct CountDataset {
    Design design = Design::paired;
    // paired: pre/post index the same animal; unpaired: pre = control group,
    // post = treatment group, lengths independent.
    std::vector<std::int64_t> pre_raw;
    std::vector<std::int64_t> post_raw;
    std::vector<double> f_pre;
    std::vector<double> f_post;

    std::size_t n_pre() const { return pre_raw.size(); }
    std::size_t n_post() const { return post_raw.size(); }

    std::vector<double> pre_epg() const {
        std::vector<double> v(pre_raw.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(pre_raw[i]) * f_pre[i];
        return v;
    }
    std::vector<double> post_epg() const {
        std::vector<double> v(post_raw.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(post_raw[i]) * f_post[i];
        return v;
    }

    void validate() const {
        if (pre_raw.size() != f_pre.size() || post_raw.size() != f_post.size())
            throw ValidationError("dataset: count and sensitivity lengths differ");
        if (design == Design::paired) {
            if (pre_raw.size() != post_raw.size())
                throw ValidationError("paired dataset: pre and post lengths differ");
            if (pre_raw.empty()) throw ValidationError("dataset: no samples");
        } else {
            if (pre_raw.empty() || post_raw.empty())
                throw ValidationError("unpaired dataset: both groups need at least one sample");
        }
        for (std::size_t i = 0; i < pre_raw.size(); ++i) {
            if (pre_raw[i] < 0)
                throw ValidationError("row " + std::to_string(i + 1) + ": negative pre count");
            if (!(f_pre[i] > 0.0))
                throw ValidationError("row " + std::to_string(i + 1) + ": f must be positive");
        }
        for (std::size_t i = 0; i < post_raw.size(); ++i) {
            if (post_raw[i] < 0)
                throw ValidationError("row " + std::to_string(i + 1) + ": negative post count");
            if (!(f_post[i] > 0.0))
                throw ValidationError("row " + std::to_string(i + 1) + ": f must be positive");
        }
    }

    bool operator==(const CountDataset&) const = default;
};

namespace csv_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_number(const std::string& s, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("row " + std::to_string(row) + ": cannot parse '" + s +
                              "' in column " + col);
    }
}

// Convert a count column value to a raw count. In epg mode the value must be
// a multiple of f (to 1e-9 relative tolerance).
inline std::int64_t to_raw(double value, double f, bool raw_counts, std::size_t row,
                           const std::string& col) {
    const double raw = raw_counts ? value : value / f;
    const double rounded = std::round(raw);
    if (std::fabs(raw - rounded) > 1e-9 * std::max(1.0, std::fabs(raw))) {
        std::ostringstream msg;
        msg << "row " << row << ": " << col << " value " << value;
        if (raw_counts)
            msg << " is not an integer count";
        else
            msg << " is not a multiple of f=" << f;
        throw ValidationError(msg.str());
    }
    if (rounded < 0.0)
        throw ValidationError("row " + std::to_string(row) + ": negative count in " + col);
    return static_cast<std::int64_t>(rounded);
}

struct Table {
    std::map<std::string, std::size_t> columns;
    std::vector<std::vector<std::string>> rows;

    bool has(const std::string& name) const { return columns.count(name) > 0; }
    const std::string& cell(std::size_t r, const std::string& name) const {
        return rows[r][columns.at(name)];
    }
};

inline Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    Table t;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        auto fields = split_row(line);
        if (!header_done) {
            for (std::size_t i = 0; i < fields.size(); ++i) t.columns[fields[i]] = i;
            header_done = true;
        } else {
            if (fields.size() < t.columns.size())
                throw ValidationError("row " + std::to_string(t.rows.size() + 1) +
                                      ": expected " + std::to_string(t.columns.size()) + " fields");
            t.rows.push_back(std::move(fields));
        }
    }
    if (!header_done) throw ValidationError("empty CSV: " + path);
    return t;
}

}  // namespace csv_detail

struct LoadOptions {
    Design design = Design::paired;
    bool raw_counts = false;
    double f_default = 1.0;
    // command-line overrides that take precedence over file columns
    std::optional<double> f_pre_override;
    std::optional<double> f_post_override;
};

// Load a dataset from CSV. Accepted layouts:
//   paired:    pre,post          (+ optional f | f_pre,f_post)
//   paired:    obsPre,masterPre,truePre,obsPost,masterPost,truePost
//              (simulator output; raw_counts picks master vs obs columns)
//   unpaired:  group,count       (+ optional f), group values C or T
// Sensitivities default to f_default when no column supplies them.
inline CountDataset load_csv(const std::string& path, const LoadOptions& opt) {
    using namespace csv_detail;
    if (!(opt.f_default > 0.0)) throw ValidationError("f must be positive");
    const Design design = opt.design;
    const bool raw_counts = opt.raw_counts;
    const Table t = read_table(path);
    CountDataset ds;
    ds.design = design;

    const bool sim_style = t.has("obsPre") && t.has("obsPost");
    const bool canonical = t.has("pre") && t.has("post");
    const bool grouped = t.has("group") && t.has("count");

    auto row_f = [&](std::size_t r, bool pre_side, const std::string& col,
                     const std::string& fallback) {
        if (pre_side && opt.f_pre_override) return *opt.f_pre_override;
        if (!pre_side && opt.f_post_override) return *opt.f_post_override;
        if (t.has(col)) return parse_number(t.cell(r, col), r + 1, col);
        if (t.has(fallback)) return parse_number(t.cell(r, fallback), r + 1, fallback);
        return opt.f_default;
    };

    if (design == Design::unpaired && grouped) {
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::string g = t.cell(r, "group");
            const bool is_control = g == "C" || g == "c" || g == "control";
            const bool is_treatment = g == "T" || g == "t" || g == "treatment";
            if (!is_control && !is_treatment)
                throw ValidationError("row " + std::to_string(r + 1) +
                                      ": group must be C or T, got '" + g + "'");
            const double f = row_f(r, is_control, "f", "f");
            const double v = parse_number(t.cell(r, "count"), r + 1, "count");
            const std::int64_t raw = to_raw(v, f, raw_counts, r + 1, "count");
            if (is_control) {
                ds.pre_raw.push_back(raw);
                ds.f_pre.push_back(f);
            } else {
                ds.post_raw.push_back(raw);
                ds.f_post.push_back(f);
            }
        }
    } else if (sim_style || canonical) {
        std::string pre_col, post_col;
        if (sim_style) {
            if (raw_counts) {
                if (!t.has("masterPre") || !t.has("masterPost"))
                    throw ValidationError("missing masterPre/masterPost columns in " + path);
                pre_col = "masterPre";
                post_col = "masterPost";
            } else {
                pre_col = "obsPre";
                post_col = "obsPost";
            }
        } else {
            pre_col = "pre";
            post_col = "post";
        }
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const double fp = row_f(r, true, "f_pre", "f");
            const double fq = row_f(r, false, "f_post", "f");
            const double pv = parse_number(t.cell(r, pre_col), r + 1, pre_col);
            const double qv = parse_number(t.cell(r, post_col), r + 1, post_col);
            ds.pre_raw.push_back(to_raw(pv, fp, raw_counts, r + 1, pre_col));
            ds.f_pre.push_back(fp);
            ds.post_raw.push_back(to_raw(qv, fq, raw_counts, r + 1, post_col));
            ds.f_post.push_back(fq);
        }
    } else {
        throw ValidationError("unrecognized CSV schema in " + path +
                              ": need pre/post, obsPre/obsPost or group/count columns");
    }
    ds.validate();
    return ds;
}

inline CountDataset load_csv(const std::string& path, Design design, bool raw_counts,
                             double f_default = 1.0) {
    LoadOptions opt;
    opt.design = design;
    opt.raw_counts = raw_counts;
    opt.f_default = f_default;
    return load_csv(path, opt);
}

// Unpaired dataset from two single-group files, each with a `count` column
// (+ optional f).
inline CountDataset load_csv_unpaired(const std::string& control_path,
                                      const std::string& treatment_path, bool raw_counts,
                                      double f_default = 1.0) {
    using namespace csv_detail;
    CountDataset ds;
    ds.design = Design::unpaired;
    auto read_group = [&](const std::string& path, std::vector<std::int64_t>& raws,
                          std::vector<double>& fs) {
        const Table t = read_table(path);
        if (!t.has("count")) throw ValidationError("missing `count` column in " + path);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const double f = t.has("f") ? parse_number(t.cell(r, "f"), r + 1, "f") : f_default;
            const double v = parse_number(t.cell(r, "count"), r + 1, "count");
            raws.push_back(to_raw(v, f, raw_counts, r + 1, "count"));
            fs.push_back(f);
        }
    };
    read_group(control_path, ds.pre_raw, ds.f_pre);
    read_group(treatment_path, ds.post_raw, ds.f_post);
    ds.validate();
    return ds;
}

inline void write_csv(std::ostream& out, const CountDataset& ds, bool raw_counts) {
    out.precision(17);
    if (ds.design == Design::paired) {
        out << "pre,post,f_pre,f_post\n";
        for (std::size_t i = 0; i < ds.pre_raw.size(); ++i) {
            if (raw_counts)
                out << ds.pre_raw[i] << ',' << ds.post_raw[i];
            else
                out << ds.pre_raw[i] * ds.f_pre[i] << ',' << ds.post_raw[i] * ds.f_post[i];
            out << ',' << ds.f_pre[i] << ',' << ds.f_post[i] << '\n';
        }
    } else {
        out << "group,count,f\n";
        for (std::size_t i = 0; i < ds.pre_raw.size(); ++i) {
            const double v = raw_counts ? static_cast<double>(ds.pre_raw[i]) : ds.pre_raw[i] * ds.f_pre[i];
            out << "C," << v << ',' << ds.f_pre[i] << '\n';
        }
        for (std::size_t i = 0; i < ds.post_raw.size(); ++i) {
            const double v = raw_counts ? static_cast<double>(ds.post_raw[i]) : ds.post_raw[i] * ds.f_post[i];
            out << "T," << v << ',' << ds.f_post[i] << '\n';
        }
    }
}

inline void write_csv(const std::string& path, const CountDataset& ds, bool raw_counts) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    write_csv(out, ds, raw_counts);
}

}  // namespace fecr
