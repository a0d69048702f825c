#include "antlgp/weblog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace antlgp::weblog {

std::string to_string(Granularity g)
{
    return g == Granularity::daily ? "daily" : "hourly";
}

std::optional<Granularity> granularity_from_string(std::string_view s)
{
    if (s == "daily")
        return Granularity::daily;
    if (s == "hourly")
        return Granularity::hourly;
    return std::nullopt;
}

namespace {

double parse_number(const std::string& field, int line_no, const char* what)
{
    if (field.empty())
        throw ParseError("line " + std::to_string(line_no) + ": empty " + what + " field");
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" + field + "'");
    return v;
}

std::int64_t parse_integer(const std::string& field, int line_no, const char* what)
{
    if (field.empty())
        throw ParseError("line " + std::to_string(line_no) + ": empty " + what + " field");
    char* end = nullptr;
    const long long v = std::strtoll(field.c_str(), &end, 10);
    if (end != field.c_str() + field.size())
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" + field + "'");
    return v;
}

} // namespace

UsageDataset parse_usage_csv(std::istream& in, std::optional<Granularity> override_granularity)
{
    UsageDataset d;
    std::optional<Granularity> file_granularity;
    bool header_seen = false;
    int truth_col = -1;
    int cluster_col = -1;
    std::size_t n_columns = 0;

    std::set<std::int64_t> seen_indexes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        if (stripped[0] == '#') {
            const std::string comment = trim(stripped.substr(1));
            constexpr std::string_view kKey = "granularity:";
            if (comment.rfind(kKey, 0) == 0) {
                const auto g = granularity_from_string(trim(comment.substr(kKey.size())));
                if (!g)
                    throw ParseError("line " + std::to_string(line_no) + ": unknown granularity");
                file_granularity = g;
            }
            continue;
        }
        auto fields = split_csv_line(stripped);
        if (!header_seen) {
            if (fields.size() < 4 || fields[0] != "index" || fields[1] != "label"
                || fields[2] != "requests" || fields[3] != "bytes")
                throw ParseError("line " + std::to_string(line_no)
                    + ": expected header 'index,label,requests,bytes'");
            for (std::size_t i = 4; i < fields.size(); ++i) {
                if (fields[i] == "truth")
                    truth_col = static_cast<int>(i);
                else if (fields[i] == "cluster")
                    cluster_col = static_cast<int>(i);
                else
                    throw ParseError("line " + std::to_string(line_no) + ": unknown column '" + fields[i] + "'");
            }
            n_columns = fields.size();
            header_seen = true;
            continue;
        }
        if (fields.size() != n_columns)
            throw ParseError("line " + std::to_string(line_no) + ": expected "
                + std::to_string(n_columns) + " fields, got " + std::to_string(fields.size()));

        UsageRecord rec;
        rec.index = parse_integer(fields[0], line_no, "index");
        rec.label = fields[1];
        rec.requests = parse_number(fields[2], line_no, "requests");
        rec.bytes = parse_number(fields[3], line_no, "bytes");
        if (rec.requests < 0.0 || rec.bytes < 0.0)
            throw ValidationError("line " + std::to_string(line_no) + ": negative count");
        if (!seen_indexes.insert(rec.index).second)
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate index "
                + std::to_string(rec.index));
        if (truth_col >= 0)
            rec.truth_label = static_cast<int>(parse_integer(fields[truth_col], line_no, "truth"));
        if (cluster_col >= 0)
            rec.cluster = static_cast<int>(parse_integer(fields[cluster_col], line_no, "cluster"));
        d.records.push_back(std::move(rec));
    }
    if (!header_seen)
        throw ParseError("missing CSV header 'index,label,requests,bytes'");

    std::sort(d.records.begin(), d.records.end(),
        [](const UsageRecord& a, const UsageRecord& b) { return a.index < b.index; });
    d.granularity = override_granularity.value_or(file_granularity.value_or(Granularity::daily));
    if (cluster_col >= 0 && !d.records.empty()) {
        int max_cluster = -1;
        for (const auto& r : d.records)
            max_cluster = std::max(max_cluster, r.cluster);
        d.num_clusters = max_cluster + 1;
    }
    return d;
}

void write_usage_csv(const UsageDataset& d, std::ostream& out)
{
    out << "# granularity: " << to_string(d.granularity) << "\n";
    const bool with_truth = std::any_of(d.records.begin(), d.records.end(),
        [](const UsageRecord& r) { return r.truth_label >= 0; });
    const bool with_cluster = std::any_of(d.records.begin(), d.records.end(),
        [](const UsageRecord& r) { return r.cluster >= 0; });
    out << "index,label,requests,bytes";
    if (with_truth)
        out << ",truth";
    if (with_cluster)
        out << ",cluster";
    out << "\n";
    for (const auto& r : d.records) {
        out << r.index << ',' << r.label << ',' << format_double(r.requests) << ','
            << format_double(r.bytes);
        if (with_truth)
            out << ',' << r.truth_label;
        if (with_cluster)
            out << ',' << r.cluster;
        out << "\n";
    }
}

namespace {

FeatureRange range_of(const std::vector<UsageRecord>& records, double (*get)(const UsageRecord&))
{
    FeatureRange r{ get(records.front()), get(records.front()) };
    for (const auto& rec : records) {
        r.min = std::min(r.min, get(rec));
        r.max = std::max(r.max, get(rec));
    }
    return r;
}

double scale_into_unit(double v, FeatureRange r)
{
    if (r.max == r.min)
        return 0.0; // constant feature
    return (v - r.min) / (r.max - r.min);
}

} // namespace

UsageDataset normalize(const UsageDataset& d)
{
    if (d.normalized())
        throw StateError("dataset is already normalized");
    if (d.records.size() < 2)
        throw ValidationError("normalization needs at least 2 records");

    UsageDataset out = d;
    FeatureRanges ranges;
    ranges.requests = range_of(out.records, [](const UsageRecord& r) { return r.requests; });
    ranges.bytes = range_of(out.records, [](const UsageRecord& r) { return r.bytes; });
    ranges.index = range_of(out.records, [](const UsageRecord& r) { return static_cast<double>(r.index); });
    for (auto& rec : out.records) {
        rec.requests = scale_into_unit(rec.requests, ranges.requests);
        rec.bytes = scale_into_unit(rec.bytes, ranges.bytes);
        rec.index_feature = scale_into_unit(static_cast<double>(rec.index), ranges.index);
    }
    out.feature_ranges = ranges;
    return out;
}

double denormalize_requests(const FeatureRanges& ranges, double value)
{
    return ranges.requests.min + value * (ranges.requests.max - ranges.requests.min);
}

UsageDataset reindex_by_cluster(const UsageDataset& d, const antcluster::ClusterAssignment& a)
{
    UsageDataset out = d;
    for (auto& rec : out.records) {
        const auto it = a.cluster_of.find(rec.index);
        if (it == a.cluster_of.end())
            throw ValidationError("record " + std::to_string(rec.index) + " missing from cluster assignment");
        rec.cluster = it->second;
    }
    std::stable_sort(out.records.begin(), out.records.end(),
        [](const UsageRecord& x, const UsageRecord& y) {
            return x.cluster != y.cluster ? x.cluster < y.cluster : x.index < y.index;
        });

    out.num_clusters = a.cluster_count();
    const auto n = static_cast<std::int64_t>(out.records.size());
    for (std::int64_t pos = 0; pos < n; ++pos) {
        auto& rec = out.records[static_cast<std::size_t>(pos)];
        rec.index = pos + 1;
        rec.index_feature = n > 1 ? static_cast<double>(pos) / static_cast<double>(n - 1) : 0.0;
        rec.cluster_feature = out.num_clusters > 1
            ? static_cast<double>(rec.cluster) / static_cast<double>(out.num_clusters - 1)
            : 0.0;
    }
    if (out.feature_ranges)
        out.feature_ranges->index = FeatureRange{ 1.0, static_cast<double>(n) };
    return out;
}

std::pair<UsageDataset, UsageDataset> split(const UsageDataset& d, const SplitSpec& s)
{
    if (d.records.empty())
        throw ValidationError("cannot split an empty dataset");
    if (s.train_begin > s.train_end || s.test_begin > s.test_end)
        throw ValidationError("split ranges must be non-empty");
    if (s.test_begin <= s.train_end)
        throw ValidationError("test range must follow the train range");
    std::int64_t min_idx = d.records.front().index;
    std::int64_t max_idx = d.records.front().index;
    for (const auto& r : d.records) {
        min_idx = std::min(min_idx, r.index);
        max_idx = std::max(max_idx, r.index);
    }
    if (s.train_begin < min_idx || s.test_end > max_idx)
        throw ValidationError("split ranges out of dataset bounds");

    UsageDataset train = d;
    UsageDataset test = d;
    train.records.clear();
    test.records.clear();
    for (const auto& r : d.records) {
        if (r.index >= s.train_begin && r.index <= s.train_end)
            train.records.push_back(r);
        else if (r.index >= s.test_begin && r.index <= s.test_end)
            test.records.push_back(r);
        else
            throw ValidationError("record " + std::to_string(r.index) + " falls in neither split range");
    }
    if (train.records.empty() || test.records.empty())
        throw ValidationError("split produced an empty partition");
    return { std::move(train), std::move(test) };
}

namespace {

const char* const kWeekdays[7] = { "Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun" };

std::string record_label(Granularity g, int i)
{
    if (g == Granularity::daily)
        return kWeekdays[i % 7];
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:00", i % 24);
    return buf;
}

} // namespace

namespace {

// Request base levels hop instead of growing with the regime id, so the raw
// regime index is not recoverable from a single feature by a monotone map.
constexpr int kLevelHops[8] = { 0, 2, 1, 3, 4, 5, 6, 7 };

} // namespace

UsageDataset synth_generate(std::uint64_t seed, int n, int regimes, double noise, Granularity granularity)
{
    if (regimes < 1 || n < regimes)
        throw ValidationError("need n >= regimes >= 1");
    if (!(noise >= 0.0 && noise < 1.0))
        throw ValidationError("noise must lie in [0,1)");

    // Traffic regimes cycle over the sequence. Bytes carries widely separated
    // base levels per regime (the cluster structure); requests carries its own
    // regime base level plus a per-regime trend slope. Noise amplitudes are
    // fixed fractions of the regime gaps, scaled by `noise`.
    Rng rng(derive_seed(seed, "synth"));
    UsageDataset d;
    d.granularity = granularity;
    d.records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int r = i % regimes;
        const double u = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        const double base_req = 1200.0 + 1200.0 * kLevelHops[r % 8] + 9600.0 * (r / 8);
        const double slope_req = (r % 2 == 0 ? 1.0 : -1.0) * 100.0 * (r + 1);
        const double base_byt = 30000.0 + 60000.0 * r;
        const double slope_byt = (r % 2 == 0 ? -1.0 : 1.0) * (2000.0 + 1000.0 * r);
        const double noise_req = noise * 2500.0 * rng.uniform_real(-1.0, 1.0);
        const double noise_byt = noise * 60000.0 * rng.uniform_real(-1.0, 1.0);

        UsageRecord rec;
        rec.index = i + 1;
        rec.label = record_label(granularity, i);
        rec.requests = std::max(0.0, base_req + slope_req * u + noise_req);
        rec.bytes = std::max(0.0, base_byt + slope_byt * u + noise_byt);
        rec.truth_label = r;
        d.records.push_back(std::move(rec));
    }
    return d;
}

std::vector<antcluster::DataItem> to_items(const UsageDataset& d)
{
    if (!d.normalized())
        throw StateError("clustering items require a normalized dataset");
    std::vector<antcluster::DataItem> items;
    items.reserve(d.records.size());
    for (const auto& r : d.records)
        items.push_back(antcluster::DataItem{ r.index, { r.requests, r.bytes }, r.truth_label });
    return items;
}

} // namespace antlgp::weblog
