#include "nidsrobust/datapipe.hpp"

#include "nidsrobust/binio.hpp"
#include "nidsrobust/error.hpp"
#include "nidsrobust/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace nidsrobust {

using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// RFC-4180-ish: quoted fields with doubled quotes, no embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::optional<double> parse_finite(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::optional<std::uint32_t> parse_ipv4(const std::string& s) {
    std::uint32_t addr = 0;
    int parts = 0;
    std::size_t pos = 0;
    while (pos <= s.size() && parts < 4) {
        const auto dot = s.find('.', pos);
        const auto end = dot == std::string::npos ? s.size() : dot;
        unsigned octet = 0;
        const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + end, octet);
        if (ec != std::errc{} || ptr != s.data() + end || octet > 255 || end == pos) return std::nullopt;
        addr = (addr << 8) | octet;
        ++parts;
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    if (parts != 4 || s.find('.', pos) != std::string::npos) return std::nullopt;
    return addr;
}

const char* derive_name(DerivedMap d) {
    switch (d) {
        case DerivedMap::none: return "none";
        case DerivedMap::port_protocol: return "port_protocol";
        case DerivedMap::ip_region: return "ip_region";
    }
    return "?";
}

DerivedMap derive_from(const std::string& s) {
    if (s == "none") return DerivedMap::none;
    if (s == "port_protocol") return DerivedMap::port_protocol;
    if (s == "ip_region") return DerivedMap::ip_region;
    throw SchemaError("unknown derived map: " + s);
}

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Schema and ingestion
// ---------------------------------------------------------------------------

Schema Schema::parse(const std::string& text) {
    Schema schema;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw SchemaError("schema line " + std::to_string(lineno) + ": expected `name,kind`");
        const auto name = trim(line.substr(0, comma));
        const auto kind = lower(trim(line.substr(comma + 1)));
        if (name.empty()) throw SchemaError("schema line " + std::to_string(lineno) + ": empty column name");
        if (!seen.insert(name).second) throw SchemaError("schema declares column twice: " + name);
        if (kind == "drop") {
            schema.dropped.push_back(name);
            continue;
        }
        ColumnSchema col{name, ColumnKind::numeric, DerivedMap::none};
        if (kind == "numeric") {
        } else if (kind == "categorical") {
            col.kind = ColumnKind::categorical;
        } else if (kind == "label") {
            col.kind = ColumnKind::label;
        } else if (kind == "port") {
            col.kind = ColumnKind::categorical;
            col.derive = DerivedMap::port_protocol;
        } else if (kind == "ip") {
            col.kind = ColumnKind::categorical;
            col.derive = DerivedMap::ip_region;
        } else {
            throw SchemaError("schema line " + std::to_string(lineno) + ": unknown kind '" + kind + "'");
        }
        schema.columns.push_back(std::move(col));
    }
    const auto labels = std::count_if(schema.columns.begin(), schema.columns.end(),
                                      [](const auto& c) { return c.kind == ColumnKind::label; });
    if (labels == 0) throw SchemaError("no label column declared in schema");
    if (labels > 1) throw SchemaError("schema declares more than one label column");
    return schema;
}

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read schema file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const RawColumn& RawRecordTable::label_column() const {
    for (const auto& c : columns)
        if (c.schema.kind == ColumnKind::label) return c;
    throw SchemaError("no label column");
}

RawRecordTable RawRecordTable::subset(const std::vector<std::size_t>& rows) const {
    RawRecordTable out;
    out.rows_dropped = rows_dropped;
    out.schema_dropped = schema_dropped;
    out.row_count = rows.size();
    for (const auto& c : columns) {
        RawColumn nc{c.schema, {}, {}};
        if (c.schema.kind == ColumnKind::numeric) {
            nc.numbers.reserve(rows.size());
            for (auto r : rows) nc.numbers.push_back(c.numbers.at(r));
        } else {
            nc.text.reserve(rows.size());
            for (auto r : rows) nc.text.push_back(c.text.at(r));
        }
        out.columns.push_back(std::move(nc));
    }
    return out;
}

RawRecordTable ingest_csv_text(const std::string& csv, const Schema& schema) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("CSV is empty (no header row)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
    const auto header = split_csv_line(line);

    std::unordered_map<std::string, std::size_t> header_pos;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!header_pos.emplace(header[i], i).second)
            throw SchemaError("duplicate CSV header column: " + header[i]);
    }
    std::set<std::string> declared(schema.dropped.begin(), schema.dropped.end());
    for (const auto& c : schema.columns) declared.insert(c.name);
    for (const auto& h : header)
        if (!declared.count(h)) throw SchemaError("header/schema mismatch: column '" + h + "' not declared");

    RawRecordTable table;
    std::vector<std::size_t> source;
    for (const auto& c : schema.columns) {
        const auto it = header_pos.find(c.name);
        if (it == header_pos.end()) {
            if (c.kind == ColumnKind::label) throw SchemaError("no label column '" + c.name + "' in CSV header");
            throw SchemaError("header/schema mismatch: declared column '" + c.name + "' missing");
        }
        table.columns.push_back(RawColumn{c, {}, {}});
        source.push_back(it->second);
    }
    for (const auto& d : schema.dropped)
        if (header_pos.count(d)) table.schema_dropped.push_back(d);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw SchemaError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(cells.size()));
        std::vector<double> parsed(table.columns.size(), 0.0);
        bool ok = true;
        for (std::size_t j = 0; j < table.columns.size() && ok; ++j) {
            if (table.columns[j].schema.kind != ColumnKind::numeric) continue;
            const auto v = parse_finite(cells[source[j]]);
            if (!v) ok = false;
            else parsed[j] = *v;
        }
        if (!ok) {
            ++table.rows_dropped;
            continue;
        }
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            auto& col = table.columns[j];
            if (col.schema.kind == ColumnKind::numeric) col.numbers.push_back(parsed[j]);
            else col.text.push_back(cells[source[j]]);
        }
        ++table.row_count;
    }
    return table;
}

RawRecordTable ingest_csv(const std::string& path, const Schema& schema) {
    return ingest_csv_text(read_file(path), schema);
}

// ---------------------------------------------------------------------------
// Derived maps
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> load_key_value_file(const std::string& path) {
    const auto text = read_file(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto sep = line.find(',');
        if (sep == std::string::npos) sep = line.find_first_of(" \t");
        if (sep == std::string::npos)
            throw SchemaError(path + ":" + std::to_string(lineno) + ": expected two columns");
        auto key = trim(line.substr(0, sep));
        auto value = trim(line.substr(sep + 1));
        if (key.empty() || value.empty())
            throw SchemaError(path + ":" + std::to_string(lineno) + ": empty key or value");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

PortProtocolMap::PortProtocolMap(const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [k, v] : entries) {
        long port = 0;
        const auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), port);
        if (ec != std::errc{} || ptr != k.data() + k.size() || port < 0 || port > 65535)
            throw SchemaError("port map: invalid port '" + k + "'");
        entries_[port] = v;
    }
}

std::string PortProtocolMap::lookup(const std::string& port) const {
    // Ports sometimes arrive as "443.0" from float-typed exports.
    const auto v = parse_finite(port);
    if (!v || *v < 0 || *v != std::floor(*v)) return "other";
    const auto it = entries_.find(static_cast<long>(*v));
    return it == entries_.end() ? "other" : it->second;
}

RegionMap::RegionMap(const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [k, v] : entries) {
        Prefix p;
        p.region = v;
        std::string addr = k;
        p.length = 32;
        if (const auto slash = k.find('/'); slash != std::string::npos) {
            addr = k.substr(0, slash);
            const auto len = k.substr(slash + 1);
            const auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), p.length);
            if (ec != std::errc{} || ptr != len.data() + len.size() || p.length < 0 || p.length > 32)
                throw SchemaError("region map: invalid prefix length in '" + k + "'");
        }
        const auto ip = parse_ipv4(addr);
        if (!ip) throw SchemaError("region map: invalid IPv4 prefix '" + k + "'");
        const std::uint32_t mask = p.length == 0 ? 0u : ~std::uint32_t{0} << (32 - p.length);
        p.network = *ip & mask;
        prefixes_.push_back(std::move(p));
    }
    std::stable_sort(prefixes_.begin(), prefixes_.end(),
                     [](const Prefix& a, const Prefix& b) { return a.length > b.length; });
}

std::string RegionMap::lookup(const std::string& address) const {
    const auto ip = parse_ipv4(address);
    if (!ip) return "unknown";
    for (const auto& p : prefixes_) {
        const std::uint32_t mask = p.length == 0 ? 0u : ~std::uint32_t{0} << (32 - p.length);
        if ((*ip & mask) == p.network) return p.region;
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Feature matrix / labels
// ---------------------------------------------------------------------------

void FeatureMatrix::validate() const {
    if (feature_names.size() != features())
        throw SchemaError("feature matrix has " + std::to_string(features()) + " columns but " +
                          std::to_string(feature_names.size()) + " names");
    if (!values.allFinite()) throw SchemaError("feature matrix contains non-finite values");
}

FeatureMatrix FeatureMatrix::rows(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out{feature_names, Matrix(static_cast<Eigen::Index>(idx.size()), values.cols())};
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

void LabelVector::validate() const {
    if (k < 2) throw SchemaError("label vector needs at least two classes");
    if (!class_names.empty() && class_names.size() != static_cast<std::size_t>(k))
        throw SchemaError("label vector class_names size differs from k");
    for (int id : ids)
        if (id < 0 || id >= k) throw SchemaError("label id out of range: " + std::to_string(id));
}

LabelVector LabelVector::rows(const std::vector<std::size_t>& idx) const {
    LabelVector out{{}, k, class_names};
    out.ids.reserve(idx.size());
    for (auto i : idx) out.ids.push_back(ids.at(i));
    return out;
}

std::vector<std::size_t> LabelVector::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int id : ids) ++counts.at(static_cast<std::size_t>(id));
    return counts;
}

// ---------------------------------------------------------------------------
// Preprocessor
// ---------------------------------------------------------------------------

PreprocessorState fit_preprocessor(const RawRecordTable& train, const PreprocessConfig& config) {
    if (train.row_count == 0) throw SchemaError("cannot fit preprocessor on an empty table");

    PreprocessorState state;
    state.label_mode = config.label_mode;
    state.benign_label = config.benign_label;
    state.dropped_columns = train.schema_dropped;
    const std::set<std::string> drop(config.drop_columns.begin(), config.drop_columns.end());

    if (config.port_map_path) state.port_map = PortProtocolMap(load_key_value_file(*config.port_map_path));
    if (config.region_map_path) state.region_map = RegionMap(load_key_value_file(*config.region_map_path));

    for (const auto& col : train.columns) {
        const auto& name = col.schema.name;
        if (col.schema.kind == ColumnKind::label) {
            state.label_column = name;
            continue;
        }
        if (drop.count(name)) {
            state.dropped_columns.push_back(name);
            continue;
        }
        if (col.schema.kind == ColumnKind::numeric) {
            const auto n = static_cast<double>(col.numbers.size());
            const double mean = std::accumulate(col.numbers.begin(), col.numbers.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : col.numbers) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / n);
            if (!(sd > 0.0)) {
                state.dropped_columns.push_back(name);
                continue;
            }
            state.numeric_stats.push_back({name, mean, sd});
        } else {
            if (col.schema.derive == DerivedMap::port_protocol && !config.port_map_path)
                throw SchemaError("column '" + name + "' needs a port->protocol map file");
            if (col.schema.derive == DerivedMap::ip_region && !config.region_map_path)
                throw SchemaError("column '" + name + "' needs an ip-prefix->region map file");
            CategoryVocab vocab{name, col.schema.derive, {}};
            std::set<std::string> seen;
            for (const auto& raw : col.text) {
                std::string v = raw;
                if (col.schema.derive == DerivedMap::port_protocol) v = state.port_map.lookup(raw);
                else if (col.schema.derive == DerivedMap::ip_region) v = state.region_map.lookup(raw);
                if (seen.insert(v).second) vocab.categories.push_back(v);
            }
            std::sort(vocab.categories.begin(), vocab.categories.end());
            state.category_vocab.push_back(std::move(vocab));
        }
    }
    if (state.numeric_stats.empty() && state.category_vocab.empty())
        throw SchemaError("all feature columns were dropped");

    const auto& labels = train.label_column().text;
    if (config.label_mode == LabelMode::binary) {
        state.class_names = {"benign", "attack"};
        const auto benign = lower(config.benign_label);
        for (const auto& l : labels) state.label_map.emplace(l, lower(l) == benign ? 0 : 1);
    } else {
        std::set<std::string> uniq(labels.begin(), labels.end());
        if (uniq.size() < 2) throw SchemaError("training split contains fewer than two label classes");
        int id = 0;
        for (const auto& l : uniq) {
            state.label_map.emplace(l, id++);
            state.class_names.push_back(l);
        }
    }
    return state;
}

std::vector<std::string> PreprocessorState::feature_names() const {
    std::vector<std::string> names;
    for (const auto& s : numeric_stats) names.push_back(s.column);
    for (const auto& v : category_vocab)
        for (const auto& c : v.categories) names.push_back(v.column + "=" + c);
    return names;
}

std::pair<FeatureMatrix, LabelVector> apply_preprocessor(const RawRecordTable& table,
                                                         const PreprocessorState& state) {
    std::unordered_map<std::string, const RawColumn*> by_name;
    for (const auto& c : table.columns) by_name.emplace(c.schema.name, &c);
    auto column = [&](const std::string& name) -> const RawColumn& {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw SchemaError("table lacks column '" + name + "' required by preprocessor");
        return *it->second;
    };

    FeatureMatrix x;
    x.feature_names = state.feature_names();
    const auto n = static_cast<Eigen::Index>(table.row_count);
    x.values = Matrix::Zero(n, static_cast<Eigen::Index>(x.feature_names.size()));

    Eigen::Index j = 0;
    for (const auto& s : state.numeric_stats) {
        const auto& col = column(s.column);
        if (col.schema.kind != ColumnKind::numeric) throw SchemaError("column '" + s.column + "' is not numeric");
        for (Eigen::Index i = 0; i < n; ++i)
            x.values(i, j) = (col.numbers[static_cast<std::size_t>(i)] - s.mean) / s.stddev;
        ++j;
    }
    for (const auto& v : state.category_vocab) {
        const auto& col = column(v.column);
        if (col.schema.kind != ColumnKind::categorical)
            throw SchemaError("column '" + v.column + "' is not categorical");
        std::unordered_map<std::string, Eigen::Index> slot;
        for (std::size_t c = 0; c < v.categories.size(); ++c) slot.emplace(v.categories[c], static_cast<Eigen::Index>(c));
        for (Eigen::Index i = 0; i < n; ++i) {
            std::string value = col.text[static_cast<std::size_t>(i)];
            if (v.derive == DerivedMap::port_protocol) value = state.port_map.lookup(value);
            else if (v.derive == DerivedMap::ip_region) value = state.region_map.lookup(value);
            if (const auto it = slot.find(value); it != slot.end()) x.values(i, j + it->second) = 1.0;
        }
        j += static_cast<Eigen::Index>(v.categories.size());
    }

    LabelVector y;
    y.k = static_cast<int>(state.class_names.size());
    y.class_names = state.class_names;
    const auto& labels = column(state.label_column).text;
    y.ids.reserve(labels.size());
    const auto benign = lower(state.benign_label);
    for (const auto& l : labels) {
        if (state.label_mode == LabelMode::binary) {
            y.ids.push_back(lower(l) == benign ? 0 : 1);
            continue;
        }
        const auto it = state.label_map.find(l);
        if (it == state.label_map.end()) throw SchemaError("unknown label class at transform time: '" + l + "'");
        y.ids.push_back(it->second);
    }
    return {std::move(x), std::move(y)};
}

std::string PreprocessorState::to_json() const {
    json j;
    j["dropped_columns"] = dropped_columns;
    j["numeric_stats"] = json::array();
    for (const auto& s : numeric_stats)
        j["numeric_stats"].push_back({{"column", s.column}, {"mean", s.mean}, {"stddev", s.stddev}});
    j["category_vocab"] = json::array();
    for (const auto& v : category_vocab)
        j["category_vocab"].push_back(
            {{"column", v.column}, {"derive", derive_name(v.derive)}, {"categories", v.categories}});
    j["label_column"] = label_column;
    j["label_mode"] = label_mode == LabelMode::binary ? "binary" : "multiclass";
    j["benign_label"] = benign_label;
    j["label_map"] = label_map;
    j["class_names"] = class_names;
    json ports = json::object();
    for (const auto& [p, proto] : port_map.entries()) ports[std::to_string(p)] = proto;
    j["port_map"] = ports;
    j["region_map"] = json::array();
    for (const auto& p : region_map.prefixes()) {
        const auto a = p.network;
        const auto cidr = std::to_string(a >> 24) + "." + std::to_string((a >> 16) & 255) + "." +
                          std::to_string((a >> 8) & 255) + "." + std::to_string(a & 255) + "/" +
                          std::to_string(p.length);
        j["region_map"].push_back({cidr, p.region});
    }
    return j.dump(2);
}

PreprocessorState PreprocessorState::from_json(const std::string& text) {
    PreprocessorState s;
    try {
        const auto j = json::parse(text);
        s.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
        for (const auto& e : j.at("numeric_stats"))
            s.numeric_stats.push_back({e.at("column"), e.at("mean"), e.at("stddev")});
        for (const auto& e : j.at("category_vocab"))
            s.category_vocab.push_back({e.at("column"), derive_from(e.at("derive")), e.at("categories")});
        s.label_column = j.at("label_column");
        s.label_mode = j.at("label_mode") == "binary" ? LabelMode::binary : LabelMode::multiclass;
        s.benign_label = j.at("benign_label");
        s.label_map = j.at("label_map").get<std::map<std::string, int>>();
        s.class_names = j.at("class_names").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> ports;
        for (const auto& [k, v] : j.at("port_map").items()) ports.emplace_back(k, v.get<std::string>());
        s.port_map = PortProtocolMap(ports);
        std::vector<std::pair<std::string, std::string>> regions;
        for (const auto& e : j.at("region_map")) regions.emplace_back(e.at(0), e.at(1));
        s.region_map = RegionMap(regions);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed preprocessor state: ") + e.what());
    }
    return s;
}

// ---------------------------------------------------------------------------
// Split and bundles
// ---------------------------------------------------------------------------

SplitIndices stratified_split(const LabelVector& y, double train_fraction, Seed seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw SchemaError("split fraction must lie in (0, 1)");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(y.k));
    for (std::size_t i = 0; i < y.ids.size(); ++i) by_class.at(static_cast<std::size_t>(y.ids[i])).push_back(i);

    SplitIndices split;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        std::mt19937_64 rng(derive_seed(seed, c));
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
        if (n_train == 0 || n_train == rows.size())
            throw SchemaError("class " + std::to_string(c) + " would be absent from a split at fraction " +
                              format_real(train_fraction));
        split.train.insert(split.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        split.test.insert(split.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

DatasetBundle make_bundle(const FeatureMatrix& x, const LabelVector& y, double train_fraction, bool undersample,
                          Seed seed) {
    if (x.samples() != y.size()) throw SchemaError("feature matrix and labels are not paired");
    return make_bundle(x, y, stratified_split(y, train_fraction, seed), undersample, seed);
}

DatasetBundle make_bundle(const FeatureMatrix& x, const LabelVector& y, const SplitIndices& split, bool undersample,
                          Seed seed) {
    if (x.samples() != y.size()) throw SchemaError("feature matrix and labels are not paired");
    auto train = split.train;
    if (undersample) {
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(y.k));
        for (auto r : train) by_class[static_cast<std::size_t>(y.ids[r])].push_back(r);
        std::size_t minority = std::numeric_limits<std::size_t>::max();
        for (const auto& rows : by_class)
            if (!rows.empty()) minority = std::min(minority, rows.size());
        train.clear();
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            auto& rows = by_class[c];
            std::mt19937_64 rng(derive_seed(seed, 0x5a5a0000ULL + c));
            std::shuffle(rows.begin(), rows.end(), rng);
            if (rows.size() > minority) rows.resize(minority);
            train.insert(train.end(), rows.begin(), rows.end());
        }
        std::sort(train.begin(), train.end());
    }

    DatasetBundle b;
    b.train_x = x.rows(train);
    b.test_x = x.rows(split.test);
    b.train_y = y.rows(train);
    b.test_y = y.rows(split.test);
    b.feature_subset_size = x.features();
    b.seed = seed;
    b.train_rows = std::move(train);
    b.test_rows = split.test;
    return b;
}

void DatasetBundle::validate() const {
    train_x.validate();
    test_x.validate();
    train_y.validate();
    test_y.validate();
    if (train_x.feature_names != test_x.feature_names) throw SchemaError("train and test feature names differ");
    if (train_x.samples() != train_y.size() || test_x.samples() != test_y.size())
        throw SchemaError("bundle features and labels are not paired");
    if (train_y.k != test_y.k) throw SchemaError("train and test class counts differ");
}

std::uint64_t DatasetBundle::fingerprint() const {
    Fnv1a h;
    auto matrix = [&](const FeatureMatrix& m) {
        for (const auto& n : m.feature_names) h.text(n).u64(0);
        h.u64(static_cast<std::uint64_t>(m.values.rows())).u64(static_cast<std::uint64_t>(m.values.cols()));
        for (Eigen::Index r = 0; r < m.values.rows(); ++r)
            for (Eigen::Index c = 0; c < m.values.cols(); ++c) h.f64(m.values(r, c));
    };
    auto labels = [&](const LabelVector& l) {
        h.u64(static_cast<std::uint64_t>(l.k));
        for (int id : l.ids) h.u64(static_cast<std::uint64_t>(id));
    };
    matrix(train_x);
    matrix(test_x);
    labels(train_y);
    labels(test_y);
    return h.value();
}

namespace {
constexpr char kBundleMagic[8] = {'N', 'R', 'B', 'U', 'N', 'D', 'L', '1'};

std::vector<int> to_ints(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }
std::vector<std::size_t> to_sizes(const std::vector<int>& v) { return {v.begin(), v.end()}; }
}  // namespace

void DatasetBundle::save(const std::string& path) const {
    std::ostringstream out(std::ios::binary);
    binio::write_magic(out, kBundleMagic);
    binio::write_u64(out, feature_subset_size);
    binio::write_u64(out, seed);
    binio::write_strings(out, train_x.feature_names);
    binio::write_strings(out, train_y.class_names);
    binio::write_u32(out, static_cast<std::uint32_t>(train_y.k));
    binio::write_matrix(out, train_x.values);
    binio::write_ints(out, train_y.ids);
    binio::write_ints(out, to_ints(train_rows));
    binio::write_matrix(out, test_x.values);
    binio::write_ints(out, test_y.ids);
    binio::write_ints(out, to_ints(test_rows));
    binio::atomic_write(path, out.str());
}

DatasetBundle DatasetBundle::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read bundle: " + path);
    binio::expect_magic(in, kBundleMagic, path);
    DatasetBundle b;
    b.feature_subset_size = binio::read_u64(in);
    b.seed = binio::read_u64(in);
    const auto names = binio::read_strings(in);
    const auto classes = binio::read_strings(in);
    const auto k = static_cast<int>(binio::read_u32(in));
    b.train_x = {names, binio::read_matrix(in)};
    b.train_y = {binio::read_ints(in), k, classes};
    b.train_rows = to_sizes(binio::read_ints(in));
    b.test_x = {names, binio::read_matrix(in)};
    b.test_y = {binio::read_ints(in), k, classes};
    b.test_rows = to_sizes(binio::read_ints(in));
    b.validate();
    return b;
}

DatasetBundle select_bundle_features(const DatasetBundle& bundle, const FeatureRanking& ranking, std::size_t k) {
    DatasetBundle out = bundle;
    out.train_x = select_top_k(bundle.train_x, ranking, k);
    out.test_x = select_top_k(bundle.test_x, ranking, k);
    out.feature_subset_size = k;
    return out;
}

FeatureRange train_feature_range(const DatasetBundle& bundle) {
    if (bundle.train_x.samples() == 0) throw SchemaError("empty training split");
    return {bundle.train_x.values.colwise().minCoeff().transpose(),
            bundle.train_x.values.colwise().maxCoeff().transpose()};
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

std::pair<FeatureMatrix, LabelVector> synth_dataset(const SynthSpec& spec, std::size_t n, std::size_t d, Seed seed) {
    if (d < 2) throw SchemaError("synthetic corpus needs d >= 2");
    if (n < 4) throw SchemaError("synthetic corpus needs n >= 4");
    if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation))
        throw SchemaError("class separation must be a non-negative finite number");
    if (spec.informative > d) throw SchemaError("more informative dimensions than features");
    if (!(spec.decay > 0.0 && spec.decay <= 1.0)) throw SchemaError("separation decay must lie in (0, 1]");
    if (!(spec.positive_fraction > 0.0 && spec.positive_fraction < 1.0))
        throw SchemaError("positive fraction must lie in (0, 1)");

    std::vector<double> offset(d, 0.0);
    for (std::size_t j = 0; j < spec.informative; ++j)
        offset[j] = 0.5 * spec.separation * std::pow(spec.decay, static_cast<double>(j));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution positive(spec.positive_fraction);

    FeatureMatrix x;
    x.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    LabelVector y{std::vector<int>(n), 2, {"benign", "attack"}};
    for (std::size_t i = 0; i < n; ++i) {
        const int label = positive(rng) ? 1 : 0;
        y.ids[i] = label;
        const double sign = label == 1 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < d; ++j)
            x.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng) + sign * offset[j];
    }
    x.feature_names.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "f%03zu", j);
        x.feature_names.emplace_back(buf);
    }
    return {std::move(x), std::move(y)};
}

}  // namespace nidsrobust
