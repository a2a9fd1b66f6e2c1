#include "nidsrobust/sweep.hpp"

#include "nidsrobust/binio.hpp"
#include "nidsrobust/error.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nidsrobust {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kResults = "results.jsonl";

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

StoreManifest manifest_from_json(const std::string& text, const std::string& path) {
    json j;
    try {
        j = json::parse(text);
        StoreManifest m;
        m.spec_hashes = j.at("spec_hashes").get<std::vector<std::uint64_t>>();
        m.corpus_hash = j.at("corpus_hash").get<std::uint64_t>();
        m.created = j.at("created").get<std::string>();
        m.engine = j.at("engine_version").get<std::string>();
        const auto& c = j.at("composition");
        m.model_cells = c.at("model_cells").get<std::size_t>();
        m.attack_runs = c.at("attack_runs").get<std::size_t>();
        m.arm_runs = c.at("arm_runs").get<std::size_t>();
        return m;
    } catch (const json::exception& e) {
        throw SchemaError("malformed store manifest " + path + ": " + e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// RunResult
// ---------------------------------------------------------------------------

std::string RunResult::to_json_line() const {
    json j;
    j["key"] = config.key();
    j["defense"] = config.defense;
    j["depth"] = config.depth;
    j["feature_count"] = config.feature_count;
    j["activation"] = std::string(to_string(config.activation));
    j["dropout"] = config.dropout;
    j["attack"] = std::string(to_string(config.attack));
    j["epsilon"] = config.epsilon;
    j["repeat"] = config.repeat;
    j["seed"] = config.seed;
    j["model_seed"] = config.model_seed;
    j["status"] = ok ? "ok" : "failed";
    j["diagnostic"] = diagnostic;
    j["clean"] = {{"accuracy", clean.accuracy},
                  {"precision", clean.precision},
                  {"recall", clean.recall},
                  {"f1", clean.f1},
                  {"averaging", clean.mode == Averaging::binary ? "binary" : "macro"},
                  {"confusion", clean.confusion}};
    json rb;
    rb["asr"] = robust.asr ? json(*robust.asr) : json(nullptr);
    rb["denominator"] = robust.denominator;
    rb["flips"] = robust.flips;
    rb["mean_confidence_drop"] = robust.mean_confidence_drop;
    rb["max_linf"] = robust.max_linf;
    rb["confidence_drops"] = robust.confidence_drops;
    j["robust"] = std::move(rb);
    j["train_time_s"] = train_time_s;
    j["attack_time_s"] = attack_time_s;
    j["engine_version"] = engine;
    return j.dump();
}

RunResult RunResult::from_json_line(std::string_view line) {
    try {
        const auto j = json::parse(line);
        RunResult r;
        auto& c = r.config;
        c.defense = j.at("defense").get<std::string>();
        c.depth = j.at("depth").get<int>();
        c.feature_count = j.at("feature_count").get<std::size_t>();
        c.activation = parse_activation(j.at("activation").get<std::string>());
        c.dropout = j.at("dropout").get<double>();
        c.attack = parse_attack_kind(j.at("attack").get<std::string>());
        c.epsilon = j.at("epsilon").get<double>();
        c.repeat = j.at("repeat").get<std::size_t>();
        c.seed = j.at("seed").get<Seed>();
        c.model_seed = j.at("model_seed").get<Seed>();
        const auto status = j.at("status").get<std::string>();
        if (status != "ok" && status != "failed") throw SchemaError("unknown run status '" + status + "'");
        r.ok = status == "ok";
        r.diagnostic = j.at("diagnostic").get<std::string>();
        const auto& cl = j.at("clean");
        r.clean.accuracy = cl.at("accuracy").get<double>();
        r.clean.precision = cl.at("precision").get<double>();
        r.clean.recall = cl.at("recall").get<double>();
        r.clean.f1 = cl.at("f1").get<double>();
        r.clean.mode = cl.at("averaging").get<std::string>() == "macro" ? Averaging::macro : Averaging::binary;
        r.clean.confusion = cl.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        const auto& rb = j.at("robust");
        if (!rb.at("asr").is_null()) r.robust.asr = rb.at("asr").get<double>();
        r.robust.denominator = rb.at("denominator").get<std::size_t>();
        r.robust.flips = rb.at("flips").get<std::size_t>();
        r.robust.mean_confidence_drop = rb.at("mean_confidence_drop").get<double>();
        r.robust.max_linf = rb.at("max_linf").get<double>();
        r.robust.confidence_drops = rb.at("confidence_drops").get<std::vector<double>>();
        r.train_time_s = j.at("train_time_s").get<double>();
        r.attack_time_s = j.at("attack_time_s").get<double>();
        r.engine = j.at("engine_version").get<std::string>();
        if (j.at("key").get<std::string>() != c.key()) throw SchemaError("run key does not match its fields");
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed run record: ") + e.what());
    }
}

bool RunResult::same_values(const RunResult& o) const {
    const auto& a = config;
    const auto& b = o.config;
    return a.key() == b.key() && a.seed == b.seed && a.model_seed == b.model_seed && ok == o.ok &&
           diagnostic == o.diagnostic && clean.accuracy == o.clean.accuracy && clean.precision == o.clean.precision &&
           clean.recall == o.clean.recall && clean.f1 == o.clean.f1 && clean.mode == o.clean.mode &&
           clean.confusion == o.clean.confusion && robust.asr == o.robust.asr &&
           robust.denominator == o.robust.denominator && robust.flips == o.robust.flips &&
           robust.mean_confidence_drop == o.robust.mean_confidence_drop && robust.max_linf == o.robust.max_linf &&
           robust.confidence_drops == o.robust.confidence_drops && engine == o.engine;
}

// ---------------------------------------------------------------------------
// ResultStore
// ---------------------------------------------------------------------------

ResultStore ResultStore::open(const std::string& dir, std::uint64_t corpus_hash) {
    ResultStore s;
    s.dir_ = dir;
    s.writable_ = true;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create store directory " + dir + ": " + ec.message());
    const fs::path mpath = fs::path(dir) / kManifest;
    if (fs::exists(mpath)) {
        s.manifest_ = manifest_from_json(read_file(mpath), mpath.string());
        if (s.manifest_.corpus_hash != corpus_hash)
            throw SchemaError("store " + dir + " was built from a different corpus (hash mismatch)");
        s.load_records();
    } else {
        s.manifest_.corpus_hash = corpus_hash;
        s.manifest_.created = utc_now();
        s.manifest_.engine = engine_version();
        s.write_manifest();
    }
    return s;
}

ResultStore ResultStore::read(const std::string& dir, std::optional<std::uint64_t> corpus_hash) {
    ResultStore s;
    s.dir_ = dir;
    const fs::path mpath = fs::path(dir) / kManifest;
    if (!fs::exists(mpath)) throw IoError("no result store at " + dir + " (missing " + kManifest + ")");
    s.manifest_ = manifest_from_json(read_file(mpath), mpath.string());
    if (corpus_hash && s.manifest_.corpus_hash != *corpus_hash)
        throw SchemaError("store " + dir + " was built from a different corpus (hash mismatch)");
    s.load_records();
    return s;
}

void ResultStore::load_records() {
    const fs::path rpath = fs::path(dir_) / kResults;
    if (!fs::exists(rpath)) return;
    std::ifstream in(rpath, std::ios::binary);
    if (!in) throw IoError("cannot open " + rpath.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto r = RunResult::from_json_line(line);
            auto key = r.config.key();
            records_.insert_or_assign(std::move(key), std::move(r));
        } catch (const SchemaError&) {
            // A torn final line from an interrupted append is dropped.
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw SchemaError(rpath.string() + ":" + std::to_string(lineno) + ": malformed run record");
        }
    }
}

void ResultStore::write_manifest() const {
    json j;
    j["spec_hashes"] = manifest_.spec_hashes;
    j["corpus_hash"] = manifest_.corpus_hash;
    j["created"] = manifest_.created;
    j["engine_version"] = manifest_.engine;
    j["composition"] = {{"model_cells", manifest_.model_cells},
                        {"attack_runs", manifest_.attack_runs},
                        {"arm_runs", manifest_.arm_runs}};
    binio::atomic_write((fs::path(dir_) / kManifest).string(), j.dump(2) + "\n");
}

void ResultStore::note_spec(std::uint64_t spec_hash, std::size_t model_cells, std::size_t attack_runs,
                            std::size_t arm_runs) {
    if (!writable_) throw IoError("result store opened read-only");
    std::lock_guard lock(*mutex_);
    if (std::find(manifest_.spec_hashes.begin(), manifest_.spec_hashes.end(), spec_hash) ==
        manifest_.spec_hashes.end())
        manifest_.spec_hashes.push_back(spec_hash);
    if (model_cells || attack_runs) {
        manifest_.model_cells = model_cells;
        manifest_.attack_runs = attack_runs;
    }
    if (arm_runs) manifest_.arm_runs = arm_runs;
    write_manifest();
}

void ResultStore::append(const RunResult& result) {
    if (!writable_) throw IoError("result store opened read-only");
    const auto line = result.to_json_line() + "\n";
    std::lock_guard lock(*mutex_);
    const fs::path rpath = fs::path(dir_) / kResults;
    std::ofstream out(rpath, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + rpath.string());
    out << line;
    out.flush();
    if (!out) throw IoError("write failed on " + rpath.string());
    records_.insert_or_assign(result.config.key(), result);
}

bool ResultStore::contains(const std::string& key) const {
    std::lock_guard lock(*mutex_);
    return records_.count(key) > 0;
}

std::optional<RunResult> ResultStore::find(const std::string& key) const {
    std::lock_guard lock(*mutex_);
    const auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::vector<RunResult> ResultStore::records() const {
    std::lock_guard lock(*mutex_);
    std::vector<RunResult> out;
    out.reserve(records_.size());
    for (const auto& [_, r] : records_) out.push_back(r);
    return out;
}

std::size_t ResultStore::size() const {
    std::lock_guard lock(*mutex_);
    return records_.size();
}

void ResultStore::validate() const {
    std::lock_guard lock(*mutex_);
    for (const auto& [key, r] : records_) {
        if (!r.ok) continue;
        if (!(r.robust.max_linf <= r.config.epsilon + 1e-12))
            throw SchemaError("run " + key + " violates its epsilon ball");
        if (r.robust.asr && (*r.robust.asr < 0.0 || *r.robust.asr > 1.0))
            throw SchemaError("run " + key + " has an ASR outside [0, 1]");
    }
}

// ---------------------------------------------------------------------------
// CorpusSource
// ---------------------------------------------------------------------------

CorpusSource CorpusSource::from_bundle(DatasetBundle bundle) {
    bundle.validate();
    CorpusSource s;
    s.ranking = rank_features(bundle.train_x, bundle.train_y);
    s.hash = bundle.fingerprint();
    s.base = std::move(bundle);
    return s;
}

DatasetBundle CorpusSource::bundle_for(std::size_t feature_count) const {
    const auto d = features();
    if (feature_count == 0) feature_count = d;
    if (feature_count > d)
        throw SchemaError("requested " + std::to_string(feature_count) + " features but the corpus has " +
                          std::to_string(d));
    return select_bundle_features(base, ranking, feature_count);
}

}  // namespace nidsrobust
