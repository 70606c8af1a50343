#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sfnls/ensemble.hpp"
#include "sfnls/error.hpp"
#include "sfnls/initial.hpp"
#include "sfnls/integrator.hpp"
#include "sfnls/noise.hpp"

namespace sfnls {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct NoiseSpec {
  std::string type = "none"; ///< none | cosine | bump | cutoff
  int K = 0;
  double epsilon = 0.0;
  AliasPolicy alias = AliasPolicy::reject;
  double amplitude = 1.0;
  double width = 1.0;
  std::optional<double> center; ///< defaults to the box center
  std::vector<int> scales;
};

struct VirialSpec {
  std::string weight = "localized"; ///< localized | quadratic
  std::optional<double> R;          ///< defaults to L/20
  std::optional<double> center;     ///< defaults to the box center
  double rel_tol = 1e-6;
};

struct DispersivePair {
  double alpha = 0.75;
  double p = 1.0;
};

struct DispersiveSpec {
  std::vector<DispersivePair> pairs;
  std::vector<double> t_grid;
};

struct BlowupSpec {
  std::vector<double> t_grid;
  bool run = true;
};

struct FigureSpec {
  std::vector<double> alphas{0.525, 0.75, 0.9, 0.975};
  std::vector<double> epsilons{0.0, 1.0};
};

struct RunConfig {
  std::string command; ///< informational, empty when unset
  SimConfig sim;
  NoiseSpec noise;
  InitialSpec initial;
  int n_traj = 1;
  int workers = 1;
  VirialSpec virial;
  DispersiveSpec dispersive;
  BlowupSpec blowup;
  FigureSpec figure;
  bool snapshots = false;

  EnsembleConfig ensemble() const {
    EnsembleConfig e;
    e.sim = sim;
    e.base_seed = sim.seed;
    e.n_traj = n_traj;
    e.workers = workers;
    return e;
  }
};

namespace detail {

/// Object view that remembers its key path and rejects unknown keys.
class Section {
public:
  Section(const json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)), allowed_(std::move(allowed)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }

  double number(const std::string& k, std::optional<double> dflt = std::nullopt) const {
    if (!has(k)) return required(k, dflt);
    const auto& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& k, std::optional<std::int64_t> dflt = std::nullopt) const {
    if (!has(k)) return required(k, dflt);
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& k, std::optional<std::uint64_t> dflt = std::nullopt) const {
    if (!has(k)) return required(k, dflt);
    const auto& v = j_.at(k);
    if (!v.is_number_unsigned()) throw ConfigError(key(k), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& k, std::optional<bool> dflt = std::nullopt) const {
    if (!has(k)) return required(k, dflt);
    const auto& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& k, std::optional<std::string> dflt = std::nullopt) const {
    if (!has(k)) return required(k, dflt);
    const auto& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }
  template <class T>
  std::vector<T> array(const std::string& k) const {
    if (!has(k)) return {};
    const auto& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& e = v[i];
      const std::string where = key(k) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_integral_v<T>) {
        if (!e.is_number_integer()) throw ConfigError(where, "expected an integer");
      } else {
        if (!e.is_number()) throw ConfigError(where, "expected a number");
      }
      out.push_back(e.get<T>());
    }
    return out;
  }
  std::optional<Section> sub(const std::string& k, std::set<std::string> allowed) const {
    if (!has(k)) return std::nullopt;
    return Section(j_.at(k), key(k), std::move(allowed));
  }
  const json& raw(const std::string& k) const { return j_.at(k); }

private:
  template <class T>
  T required(const std::string& k, const std::optional<T>& dflt) const {
    if (!dflt) throw ConfigError(key(k), "required key missing");
    return *dflt;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> allowed_;
};

/// Re-raise library validation failures with the key path of the section.
template <class F>
void checked(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where, e.what());
  }
}

} // namespace detail

/// Parse a config (or a manifest, whose "config" member is used).
inline RunConfig config_from_json(const json& root_in) {
  const bool manifest = root_in.is_object() && root_in.contains("manifest_version");
  if (manifest && !root_in.contains("config")) throw ConfigError("config", "manifest without a config member");
  const json& root = manifest ? root_in.at("config") : root_in;
  using detail::Section;
  Section top(root, "",
              {"format_version", "command", "grid", "params", "time", "scheme", "noise", "seed", "ensemble",
               "initial", "guard", "dealias", "virial", "dispersive", "blowup", "figure", "output"});
  const auto version = top.integer("format_version");
  if (version != kFormatVersion)
    throw ConfigError("format_version", "unsupported version " + std::to_string(version));

  RunConfig c;
  c.command = top.string("command", std::string{});

  if (!top.has("grid")) throw ConfigError("grid", "required key missing");
  Section grid(root.at("grid"), "grid", {"n", "L", "N", "origin"});
  detail::checked("grid", [&] {
    c.sim.grid = GridSpec(static_cast<int>(grid.integer("n")), grid.number("L"),
                          static_cast<int>(grid.integer("N")), grid.number("origin", 0.0));
  });

  if (!top.has("params")) throw ConfigError("params", "required key missing");
  Section params(root.at("params"), "params", {"alpha", "sigma"});
  detail::checked("params", [&] { c.sim.params = FracParams(params.number("alpha"), params.number("sigma"), c.sim.grid.n); });

  if (!top.has("time")) throw ConfigError("time", "required key missing");
  Section time(root.at("time"), "time", {"dt", "t_final", "sample_every"});
  c.sim.dt = time.number("dt");
  c.sim.t_final = time.number("t_final");
  c.sim.sample_every = static_cast<int>(time.integer("sample_every", 1));

  const std::string scheme = top.string("scheme", std::string("strang"));
  if (scheme == "strang") c.sim.scheme = Scheme::strang;
  else if (scheme == "lie") c.sim.scheme = Scheme::lie;
  else throw ConfigError("scheme", "expected strang or lie, got \"" + scheme + "\"");

  c.sim.seed = top.unsigned_integer("seed", 0);
  c.sim.dealias = top.boolean("dealias", false);

  if (auto g = top.sub("guard", {"enabled", "kinetic_ratio", "mass_drift"})) {
    c.sim.guard.enabled = g->boolean("enabled", true);
    c.sim.guard.kinetic_ratio = g->number("kinetic_ratio", 1e6);
    c.sim.guard.mass_drift = g->number("mass_drift", 1e-6);
    if (!(c.sim.guard.kinetic_ratio > 1.0)) throw ConfigError("guard.kinetic_ratio", "must exceed 1");
    if (!(c.sim.guard.mass_drift > 0.0)) throw ConfigError("guard.mass_drift", "must be positive");
  }
  detail::checked("time", [&] { c.sim.validate(); });

  if (auto n = top.sub("noise", {"type", "K", "epsilon", "alias", "amplitude", "width", "center", "scales"})) {
    c.noise.type = n->string("type");
    c.noise.epsilon = n->number("epsilon", 0.0);
    if (!(c.noise.epsilon >= 0.0)) throw ConfigError("noise.epsilon", "must be >= 0");
    const std::string alias = n->string("alias", std::string("reject"));
    if (alias == "reject") c.noise.alias = AliasPolicy::reject;
    else if (alias == "allow") c.noise.alias = AliasPolicy::allow;
    else throw ConfigError("noise.alias", "expected reject or allow");
    c.noise.amplitude = n->number("amplitude", 1.0);
    c.noise.width = n->number("width", 1.0);
    if (n->has("center")) c.noise.center = n->number("center");
    if (c.noise.type == "cosine") {
      c.noise.K = static_cast<int>(n->integer("K"));
      if (c.noise.K < 0) throw ConfigError("noise.K", "must be >= 0");
    } else if (c.noise.type == "cutoff") {
      c.noise.scales = n->array<int>("scales");
      if (c.noise.scales.empty()) throw ConfigError("noise.scales", "required for type cutoff");
    } else if (c.noise.type == "bump") {
      if (!(c.noise.width > 0.0)) throw ConfigError("noise.width", "must be positive");
    } else if (c.noise.type != "none") {
      throw ConfigError("noise.type", "expected none, cosine, bump or cutoff, got \"" + c.noise.type + "\"");
    }
  }

  if (auto e = top.sub("ensemble", {"n_traj", "workers"})) {
    c.n_traj = static_cast<int>(e->integer("n_traj", 1));
    c.workers = static_cast<int>(e->integer("workers", 1));
    if (c.n_traj < 1) throw ConfigError("ensemble.n_traj", "must be >= 1");
    if (c.workers < 1) throw ConfigError("ensemble.workers", "must be >= 1");
  }

  if (auto i = top.sub("initial", {"type", "amplitude", "width", "center", "wavenumber"})) {
    c.initial.type = i->string("type");
    c.initial.amplitude = i->number("amplitude", 1.0);
    c.initial.width = i->number("width", 1.0);
    c.initial.center = i->number("center", 0.0);
    c.initial.wavenumber = i->number("wavenumber", 0.0);
    c.initial.validate();
  }

  if (auto v = top.sub("virial", {"weight", "R", "center", "rel_tol"})) {
    c.virial.weight = v->string("weight", std::string("localized"));
    if (c.virial.weight != "localized" && c.virial.weight != "quadratic")
      throw ConfigError("virial.weight", "expected localized or quadratic");
    if (v->has("R")) {
      c.virial.R = v->number("R");
      if (!(*c.virial.R > 0.0)) throw ConfigError("virial.R", "must be positive");
    }
    if (v->has("center")) c.virial.center = v->number("center");
    c.virial.rel_tol = v->number("rel_tol", 1e-6);
  }

  if (auto d = top.sub("dispersive", {"pairs", "t_grid"})) {
    if (d->has("pairs")) {
      const auto& arr = d->raw("pairs");
      if (!arr.is_array()) throw ConfigError("dispersive.pairs", "expected an array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        Section p(arr[k], "dispersive.pairs[" + std::to_string(k) + "]", {"alpha", "p"});
        DispersivePair dp{p.number("alpha"), p.number("p")};
        if (!(dp.alpha > 0.0 && dp.alpha <= 1.0)) throw ConfigError(p.key("alpha"), "must lie in (0,1]");
        if (!(dp.p >= 1.0 && dp.p <= 2.0)) throw ConfigError(p.key("p"), "must lie in [1,2]");
        c.dispersive.pairs.push_back(dp);
      }
    }
    c.dispersive.t_grid = d->array<double>("t_grid");
  }

  if (auto b = top.sub("blowup", {"t_grid", "run"})) {
    c.blowup.t_grid = b->array<double>("t_grid");
    for (std::size_t k = 0; k < c.blowup.t_grid.size(); ++k)
      if (!(c.blowup.t_grid[k] > 0.0))
        throw ConfigError("blowup.t_grid[" + std::to_string(k) + "]", "must be positive");
    c.blowup.run = b->boolean("run", true);
  }

  if (auto f = top.sub("figure", {"alphas", "epsilons"})) {
    if (f->has("alphas")) c.figure.alphas = f->array<double>("alphas");
    if (f->has("epsilons")) c.figure.epsilons = f->array<double>("epsilons");
    for (std::size_t k = 0; k < c.figure.alphas.size(); ++k)
      if (!(c.figure.alphas[k] > 0.0 && c.figure.alphas[k] <= 1.0))
        throw ConfigError("figure.alphas[" + std::to_string(k) + "]", "must lie in (0,1]");
  }

  if (auto o = top.sub("output", {"snapshots"})) c.snapshots = o->boolean("snapshots", false);
  return c;
}

/// Canonical JSON form; config_from_json(config_to_json(c)) reproduces c.
inline json config_to_json(const RunConfig& c) {
  json j;
  j["format_version"] = kFormatVersion;
  if (!c.command.empty()) j["command"] = c.command;
  const auto& g = c.sim.grid;
  j["grid"] = {{"n", g.n}, {"L", g.L}, {"N", g.N}, {"origin", g.origin}};
  j["params"] = {{"alpha", c.sim.params.alpha}, {"sigma", c.sim.params.sigma}};
  j["time"] = {{"dt", c.sim.dt}, {"t_final", c.sim.t_final}, {"sample_every", c.sim.sample_every}};
  j["scheme"] = to_string(c.sim.scheme);
  j["seed"] = c.sim.seed;
  j["dealias"] = c.sim.dealias;
  j["guard"] = {{"enabled", c.sim.guard.enabled},
                {"kinetic_ratio", c.sim.guard.kinetic_ratio},
                {"mass_drift", c.sim.guard.mass_drift}};
  json n = {{"type", c.noise.type},
            {"epsilon", c.noise.epsilon},
            {"alias", c.noise.alias == AliasPolicy::allow ? "allow" : "reject"},
            {"amplitude", c.noise.amplitude},
            {"width", c.noise.width}};
  if (c.noise.type == "cosine") n["K"] = c.noise.K;
  if (c.noise.type == "cutoff") n["scales"] = c.noise.scales;
  if (c.noise.center) n["center"] = *c.noise.center;
  j["noise"] = n;
  j["ensemble"] = {{"n_traj", c.n_traj}, {"workers", c.workers}};
  j["initial"] = {{"type", c.initial.type},
                  {"amplitude", c.initial.amplitude},
                  {"width", c.initial.width},
                  {"center", c.initial.center},
                  {"wavenumber", c.initial.wavenumber}};
  json v = {{"weight", c.virial.weight}, {"rel_tol", c.virial.rel_tol}};
  if (c.virial.R) v["R"] = *c.virial.R;
  if (c.virial.center) v["center"] = *c.virial.center;
  j["virial"] = v;
  json pairs = json::array();
  for (const auto& p : c.dispersive.pairs) pairs.push_back({{"alpha", p.alpha}, {"p", p.p}});
  j["dispersive"] = {{"pairs", pairs}, {"t_grid", c.dispersive.t_grid}};
  j["blowup"] = {{"t_grid", c.blowup.t_grid}, {"run", c.blowup.run}};
  j["figure"] = {{"alphas", c.figure.alphas}, {"epsilons", c.figure.epsilons}};
  j["output"] = {{"snapshots", c.snapshots}};
  return j;
}

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // e.byte is a 1-based offset; report it as line:column.
    std::ifstream again(path);
    std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
  }
}

inline RunConfig read_config(const std::string& path) { return config_from_json(parse_json_file(path)); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

inline void write_config(const RunConfig& c, const std::string& path) {
  write_text(path, config_to_json(c).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Noise and weight from a config
// ---------------------------------------------------------------------------

inline NoiseModel make_noise(const NoiseSpec& s, const GridSpec& g, double epsilon) {
  const double c = s.center.value_or(g.center());
  if (s.type == "none") return build_zero_model(g);
  if (s.type == "cosine") return build_cosine_model(s.K, g, epsilon, s.alias);
  if (s.type == "bump") return build_bump_model(g, epsilon, s.amplitude, s.width, {c, c});
  if (s.type == "cutoff") return build_cutoff_family(g, epsilon, s.scales, {c, c});
  throw ConfigError("noise.type", "unknown type " + s.type);
}

inline NoiseModel make_noise(const RunConfig& c) { return make_noise(c.noise, c.sim.grid, c.noise.epsilon); }

inline VirialWeight make_weight(const VirialSpec& v, const GridSpec& g) {
  const double c = v.center.value_or(g.center());
  if (v.weight == "quadratic") return build_quadratic_weight(g, {c, c});
  return build_virial_weight(v.R.value_or(g.L / 20.0), g, {c, c});
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kRecordHeader = "t,mass,kinetic,potential,energy,virial,lq_norm,linf,tail_mass,traj_id";

inline void append_record_rows(std::string& out, const std::vector<DiagnosticsRecord>& recs, int traj_id) {
  for (const auto& r : recs) {
    for (double v : {r.t, r.mass, r.kinetic, r.potential, r.energy, r.virial, r.lq_norm, r.linf, r.tail_mass}) {
      out += fmt_double(v);
      out += ',';
    }
    out += std::to_string(traj_id);
    out += '\n';
  }
}

inline std::string records_csv(const std::vector<std::vector<DiagnosticsRecord>>& per_traj) {
  std::string out = std::string(kRecordHeader) + "\n";
  for (std::size_t i = 0; i < per_traj.size(); ++i) append_record_rows(out, per_traj[i], static_cast<int>(i));
  return out;
}

inline void write_csv(const std::vector<DiagnosticsRecord>& recs, const std::string& path, int traj_id = 0) {
  std::string out = std::string(kRecordHeader) + "\n";
  append_record_rows(out, recs, traj_id);
  write_text(path, out);
}

inline void write_csv(const std::vector<RunResult>& runs, const std::string& path) {
  std::vector<std::vector<DiagnosticsRecord>> recs;
  for (const auto& r : runs) recs.push_back(r.records);
  write_text(path, records_csv(recs));
}

/// Columns t, count, then mean_<field>, stderr_<field> per averaged scalar.
inline std::string stats_csv(const EnsembleStats& st) {
  std::string out = "t,count";
  for (const char* f : kStatFields) out += std::string(",mean_") + f + ",stderr_" + f;
  out += '\n';
  for (std::size_t s = 0; s < st.samples(); ++s) {
    out += fmt_double(st.t[s]) + "," + std::to_string(st.count[s]);
    for (std::size_t f = 0; f < kStatFields.size(); ++f)
      out += "," + fmt_double(st.mean[f][s]) + "," + fmt_double(st.stderr_[f][s]);
    out += '\n';
  }
  return out;
}

inline void write_csv(const EnsembleStats& st, const std::string& path) { write_text(path, stats_csv(st)); }

/// |u(x,t)| table for a 1-d run: header "t\x,x_0,...", one row per snapshot.
inline std::string heatmap_csv(const std::vector<double>& times, const std::vector<ComplexField>& fields) {
  if (fields.empty()) throw InvalidArgument("heatmap: no fields");
  const GridSpec& g = fields.front().grid;
  if (g.n != 1) throw InvalidArgument("heatmap: needs a 1-d grid");
  std::string out = "t\\x";
  for (int j = 0; j < g.N; ++j) out += "," + fmt_double(g.coord(j));
  out += '\n';
  for (std::size_t s = 0; s < fields.size(); ++s) {
    out += fmt_double(times.at(s));
    for (const auto& v : fields[s].values) out += "," + fmt_double(std::abs(v));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Field snapshots (little-endian binary)
// ---------------------------------------------------------------------------
//
// File:   magic "SFNLSNAP" | u32 version | u32 n | u32 N | u32 0 |
//         f64 L | f64 origin | u64 record count
// Record: f64 t | u64 value count | value count x (f64 re, f64 im)

inline constexpr char kSnapshotMagic[8] = {'S', 'F', 'N', 'L', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

inline void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f64(std::string& b, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(b, v);
}

class ByteReader {
public:
  explicit ByteReader(std::string data) : d_(std::move(data)) {}
  std::uint64_t u(int bytes) {
    if (pos_ + bytes > d_.size()) throw Error("snapshot file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    pos_ += bytes;
    return v;
  }
  double f64() {
    const std::uint64_t v = u(8);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string bytes(std::size_t n) {
    if (pos_ + n > d_.size()) throw Error("snapshot file truncated");
    std::string s = d_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == d_.size(); }

private:
  std::string d_;
  std::size_t pos_ = 0;
};

} // namespace detail

struct Snapshot {
  double t = 0.0;
  ComplexField field;
};

inline void write_snapshots(const std::vector<Snapshot>& snaps, const GridSpec& g, const std::string& path) {
  std::string b(kSnapshotMagic, 8);
  detail::put_u32(b, kSnapshotVersion);
  detail::put_u32(b, static_cast<std::uint32_t>(g.n));
  detail::put_u32(b, static_cast<std::uint32_t>(g.N));
  detail::put_u32(b, 0);
  detail::put_f64(b, g.L);
  detail::put_f64(b, g.origin);
  detail::put_u64(b, snaps.size());
  for (const auto& s : snaps) {
    require_same_grid(s.field.grid, g, "write_snapshots");
    detail::put_f64(b, s.t);
    detail::put_u64(b, s.field.size());
    for (const auto& v : s.field.values) {
      detail::put_f64(b, v.real());
      detail::put_f64(b, v.imag());
    }
  }
  write_text(path, b);
}

inline std::vector<Snapshot> read_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  detail::ByteReader r(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  if (r.bytes(8) != std::string(kSnapshotMagic, 8)) throw Error(path + ": not a snapshot file");
  const auto version = r.u(4);
  if (version != kSnapshotVersion) throw Error(path + ": unsupported snapshot version " + std::to_string(version));
  const int n = static_cast<int>(r.u(4));
  const int N = static_cast<int>(r.u(4));
  r.u(4);
  const double L = r.f64();
  const double origin = r.f64();
  const GridSpec g(n, L, N, origin);
  const auto count = r.u(8);
  std::vector<Snapshot> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    Snapshot s;
    s.t = r.f64();
    const auto m = r.u(8);
    if (m != g.size()) throw Error(path + ": record size does not match the grid");
    s.field = ComplexField(g);
    for (std::uint64_t i = 0; i < m; ++i) {
      const double re = r.f64();
      const double im = r.f64();
      s.field[i] = cplx(re, im);
    }
    out.push_back(std::move(s));
  }
  if (!r.done()) throw Error(path + ": trailing bytes after the last record");
  return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// manifest.json: the canonical config plus run metadata. read_config
/// accepts it in place of a config, so a run can be repeated from it.
inline json make_manifest(const RunConfig& c, const std::string& command, double wall_time_s,
                          const std::string& status, const std::vector<std::string>& outputs) {
  RunConfig copy = c;
  copy.command = command;
  return json{{"manifest_version", 1},
              {"format_version", kFormatVersion},
              {"command", command},
              {"status", status},
              {"wall_time_s", wall_time_s},
              {"outputs", outputs},
              {"config", config_to_json(copy)}};
}

} // namespace sfnls
