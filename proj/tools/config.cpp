#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <set>
#include <sstream>

#include "cnc/format.hpp"
#include "cnc/io.hpp"
#include "cnc/severity.hpp"

namespace cnc::cli {
namespace {

struct Context {
  std::string source;
  std::set<std::string> overridden;

  [[noreturn]] void fail(const std::string& path, const YAML::Mark& mark, const std::string& msg) const {
    std::ostringstream os;
    if (overridden.count(path) != 0) {
      os << "--set " << path << ": " << msg;
    } else if (mark.line >= 0) {
      os << source << ":" << mark.line + 1 << ":" << mark.column + 1 << ": " << path << ": " << msg;
    } else {
      os << source << ": " << path << ": " << msg;
    }
    throw ConfigError(os.str());
  }
};

template <typename T>
const char* type_name() {
  if constexpr (std::is_same_v<T, std::string>) return "a string";
  else if constexpr (std::is_same_v<T, double>) return "a number";
  else if constexpr (std::is_same_v<T, std::uint64_t>) return "a non-negative integer";
  else return "an integer";
}

class Section {
public:
  Section(YAML::Node node, std::string path, const Context& ctx) : node_(node), path_(std::move(path)), ctx_(ctx) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      ctx_.fail(path_.empty() ? "<root>" : path_, node_.Mark(), "expected a mapping");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const YAML::Node v = lookup(key);
    if (!v) return;
    out = scalar<T>(v, join(key));
  }

  template <typename T>
  void get_list(const std::string& key, std::vector<T>& out) {
    const YAML::Node v = lookup(key);
    if (!v) return;
    if (!v.IsSequence()) ctx_.fail(join(key), v.Mark(), "expected a list");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(scalar<T>(v[i], join(key)));
    }
  }

  Section sub(const std::string& key) { return {lookup(key), join(key), ctx_}; }

  YAML::Mark mark_of(const std::string& key) const {
    if (node_ && node_.IsMap() && node_[key]) return node_[key].Mark();
    return node_ ? node_.Mark() : YAML::Mark::null_mark();
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    ctx_.fail(join(key), mark_of(key), msg);
  }

  /// Rejects keys that no get/sub call asked for.
  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string k = it->first.as<std::string>();
      if (seen_.count(k) == 0) {
        ctx_.fail(join(k), it->first.Mark(), "unknown key");
      }
    }
  }

private:
  YAML::Node lookup(const std::string& key) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    YAML::Node v = node_[key];
    if (!v || v.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return v;
  }

  template <typename T>
  T scalar(const YAML::Node& v, const std::string& path) const {
    if (!v.IsScalar()) ctx_.fail(path, v.Mark(), std::string("expected ") + type_name<T>());
    try {
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        const std::string s = v.Scalar();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw YAML::Exception(v.Mark(), "");
        return v.as<std::uint64_t>();
      } else if constexpr (std::is_same_v<T, double>) {
        const double d = v.as<double>();
        if (!std::isfinite(d)) ctx_.fail(path, v.Mark(), "must be finite");
        return d;
      } else {
        return v.as<T>();
      }
    } catch (const YAML::Exception&) {
      ctx_.fail(path, v.Mark(), std::string("expected ") + type_name<T>() + ", got '" + v.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  const Context& ctx_;
  std::set<std::string> seen_;
};

void apply_override(YAML::Node root, const std::string& spec, Context& ctx) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set " + spec + ": expected key.path=value");
  }
  const std::string path = spec.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(spec.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + path + ": " + e.msg);
  }
  std::vector<std::string> parts;
  for (std::size_t start = 0;;) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // yaml-cpp nodes are handles; walk with a vector to avoid rebinding.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (next && !next.IsNull() && !next.IsMap()) {
      throw ConfigError("--set " + path + ": '" + parts[i] + "' is not a section");
    }
    if (!next || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = value;
  ctx.overridden.insert(path);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::vector<std::string>& overrides) {
  Context ctx{source, {}};
  YAML::Node root;
  try {
    root = text.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) {
    throw ConfigError(source + ": top level must be a mapping");
  }
  for (const std::string& o : overrides) apply_override(root, o, ctx);

  ExperimentConfig cfg;
  Section top(root, "", ctx);
  top.get("seed", cfg.seed);
  std::string out = cfg.output_dir.string();
  top.get("output_dir", out);
  cfg.output_dir = out;
  top.get("severity_table", cfg.severity_table);

  {
    Section s = top.sub("dataset");
    DatasetSpec& d = cfg.dataset;
    s.get("kind", d.kind);
    if (d.kind != "two_moons" && d.kind != "clusters" && d.kind != "cifar10_binary") {
      s.fail("kind", "expected two_moons, clusters or cifar10_binary, got '" + d.kind + "'");
    }
    s.get("n_per_class", d.n_per_class);
    s.get("test_n_per_class", d.test_n_per_class);
    s.get("noise", d.noise);
    s.get("classes", d.classes);
    s.get("sigma", d.sigma);
    s.get("side", d.side);
    s.get_list("files", d.files);
    s.get_list("test_files", d.test_files);
    s.get("limit", d.limit);
    s.get("downsample", d.downsample);
    if (d.n_per_class < 1) s.fail("n_per_class", "must be >= 1");
    if (d.test_n_per_class < 1) s.fail("test_n_per_class", "must be >= 1");
    if (!(d.noise >= 0.0)) s.fail("noise", "must be >= 0");
    if (d.classes < 2) s.fail("classes", "must be >= 2");
    if (!(d.sigma > 0.0)) s.fail("sigma", "must be > 0");
    if (!(d.side > 0.0)) s.fail("side", "must be > 0");
    if (d.limit < 0) s.fail("limit", "must be >= 0");
    if (d.downsample < 1) s.fail("downsample", "must be >= 1");
    if (d.kind == "cifar10_binary" && d.files.empty()) s.fail("files", "cifar10_binary needs at least one file");
    s.finish();
  }

  {
    Section s = top.sub("generation");
    GenConfig& g = cfg.gen;
    std::string variant = std::string(to_string(g.variant));
    s.get("variant", variant);
    try {
      g.variant = parse_variant(variant);
    } catch (const std::invalid_argument& e) {
      s.fail("variant", e.what());
    }
    Section lam = s.sub("lambda");
    lam.get("lo", g.lambda_law.lo);
    lam.get("hi", g.lambda_law.hi);
    lam.finish();
    g.op_pool = cfg.dataset.planar() ? default_point_ops() : default_image_ops();
    s.get_list("ops", g.op_pool);
    s.get_list("severities", g.severity_pool);
    s.get("ood_ratio", g.ood_ratio);
    for (const std::string& op : g.op_pool) {
      const bool ok = cfg.dataset.planar() ? is_point_corruption(op) : is_image_corruption(op);
      if (!ok) s.fail("ops", "'" + op + "' is not a " + (cfg.dataset.planar() ? "point" : "image") + " corruption");
    }
    try {
      GenConfig probe = g;
      probe.variant = Variant::cnc;
      probe.validate();
    } catch (const std::invalid_argument& e) {
      s.fail("variant", e.what());
    }
    s.finish();
  }

  {
    Section s = top.sub("model");
    s.get_list("hidden", cfg.hidden);
    for (int h : cfg.hidden) {
      if (h < 1) s.fail("hidden", "widths must be >= 1");
    }
    s.finish();
  }

  {
    Section s = top.sub("train");
    TrainConfig& t = cfg.train;
    s.get("alpha", t.alpha);
    s.get("lr", t.lr);
    s.get("momentum", t.momentum);
    s.get("weight_decay", t.weight_decay);
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    try {
      t.validate();
    } catch (const std::invalid_argument& e) {
      s.fail("epochs", e.what());
    }
    s.finish();
  }

  {
    Section s = top.sub("generate");
    s.get("count", cfg.generate.count);
    s.get("previews", cfg.generate.previews);
    if (cfg.generate.count < 0) s.fail("count", "must be >= 0");
    if (cfg.generate.previews < 0) s.fail("previews", "must be >= 0");
    s.finish();
  }

  {
    Section s = top.sub("eval");
    EvalSpec& e = cfg.eval;
    s.get("checkpoint", e.checkpoint);
    s.get("ood", e.ood);
    s.get("ood_count", e.ood_count);
    s.get("ring_factor", e.ring_factor);
    s.get("box_factor", e.box_factor);
    s.get_list("ood_files", e.ood_files);
    s.get("ood_corruption", e.ood_corruption);
    s.get("ood_severity", e.ood_severity);
    s.get("ece_bins", e.ece_bins);
    const bool planar = cfg.dataset.planar();
    if (planar && e.ood != "ring" && e.ood != "box") s.fail("ood", "planar data supports ring or box");
    if (!planar && e.ood != "files" && e.ood != "noise" && e.ood != "corruption") {
      s.fail("ood", "image data supports files, noise or corruption");
    }
    if (e.ood == "files" && e.ood_files.empty()) s.fail("ood_files", "ood: files needs at least one file");
    if (!is_image_corruption(e.ood_corruption)) s.fail("ood_corruption", "not an image corruption");
    if (e.ood_severity < 1 || e.ood_severity > 5) s.fail("ood_severity", "must be in 1..5");
    if (e.ood_count < 1) s.fail("ood_count", "must be >= 1");
    if (!(e.ring_factor > 0.0)) s.fail("ring_factor", "must be > 0");
    if (!(e.box_factor > 0.0)) s.fail("box_factor", "must be > 0");
    if (e.ece_bins < 1) s.fail("ece_bins", "must be >= 1");
    s.finish();
  }

  {
    Section s = top.sub("polytope");
    s.get("checkpoint", cfg.polytope.checkpoint);
    s.get("domain_factor", cfg.polytope.domain_factor);
    std::string metric = to_string(cfg.polytope.metric);
    s.get("metric", metric);
    try {
      cfg.polytope.metric = parse_area_metric(metric);
    } catch (const std::invalid_argument& e) {
      s.fail("metric", e.what());
    }
    if (!(cfg.polytope.domain_factor > 0.0)) s.fail("domain_factor", "must be > 0");
    s.finish();
  }

  {
    Section s = top.sub("diversity");
    s.get("reference_checkpoint", cfg.diversity.reference_checkpoint);
    std::vector<std::string> names;
    for (Variant v : cfg.diversity.variants) names.emplace_back(to_string(v));
    s.get_list("variants", names);
    cfg.diversity.variants.clear();
    for (const std::string& n : names) {
      try {
        const Variant v = parse_variant(n);
        if (v == Variant::none) s.fail("variants", "'none' generates nothing");
        cfg.diversity.variants.push_back(v);
      } catch (const std::invalid_argument& e) {
        s.fail("variants", e.what());
      }
    }
    if (cfg.diversity.variants.empty()) s.fail("variants", "must not be empty");
    s.get("samples", cfg.diversity.samples);
    if (cfg.diversity.samples < 0) s.fail("samples", "must be >= 0");
    s.finish();
  }

  {
    Section s = top.sub("fig2");
    s.get("samples", cfg.fig2.samples);
    if (cfg.fig2.samples < 2) s.fail("samples", "must be >= 2");
    s.finish();
  }

  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_config(text, path.string(), overrides);
}

std::string emit_config(const ExperimentConfig& c) {
  YAML::Emitter y;
  auto num = [](double v) { return fmt_double(v); };
  auto strs = [&](const std::vector<std::string>& v) {
    y << YAML::Flow << YAML::BeginSeq;
    for (const auto& s : v) y << s;
    y << YAML::EndSeq;
  };
  auto ints = [&](const std::vector<int>& v) {
    y << YAML::Flow << YAML::BeginSeq;
    for (int s : v) y << s;
    y << YAML::EndSeq;
  };
  y << YAML::BeginMap;
  y << YAML::Key << "seed" << YAML::Value << c.seed;
  y << YAML::Key << "severity_table" << YAML::Value << c.severity_table;
  y << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "kind" << YAML::Value << c.dataset.kind;
  y << YAML::Key << "n_per_class" << YAML::Value << c.dataset.n_per_class;
  y << YAML::Key << "test_n_per_class" << YAML::Value << c.dataset.test_n_per_class;
  y << YAML::Key << "noise" << YAML::Value << num(c.dataset.noise);
  y << YAML::Key << "classes" << YAML::Value << c.dataset.classes;
  y << YAML::Key << "sigma" << YAML::Value << num(c.dataset.sigma);
  y << YAML::Key << "side" << YAML::Value << num(c.dataset.side);
  y << YAML::Key << "files" << YAML::Value;
  strs(c.dataset.files);
  y << YAML::Key << "test_files" << YAML::Value;
  strs(c.dataset.test_files);
  y << YAML::Key << "limit" << YAML::Value << c.dataset.limit;
  y << YAML::Key << "downsample" << YAML::Value << c.dataset.downsample;
  y << YAML::EndMap;
  y << YAML::Key << "generation" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "variant" << YAML::Value << std::string(to_string(c.gen.variant));
  y << YAML::Key << "lambda" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "lo" << YAML::Value
    << num(c.gen.lambda_law.lo) << YAML::Key << "hi" << YAML::Value << num(c.gen.lambda_law.hi) << YAML::EndMap;
  y << YAML::Key << "ops" << YAML::Value;
  strs(c.gen.op_pool);
  y << YAML::Key << "severities" << YAML::Value;
  ints(c.gen.severity_pool);
  y << YAML::Key << "ood_ratio" << YAML::Value << num(c.gen.ood_ratio);
  y << YAML::EndMap;
  y << YAML::Key << "model" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden" << YAML::Value;
  ints(c.hidden);
  y << YAML::EndMap;
  y << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "alpha" << YAML::Value << num(c.train.alpha);
  y << YAML::Key << "lr" << YAML::Value << num(c.train.lr);
  y << YAML::Key << "momentum" << YAML::Value << num(c.train.momentum);
  y << YAML::Key << "weight_decay" << YAML::Value << num(c.train.weight_decay);
  y << YAML::Key << "epochs" << YAML::Value << c.train.epochs;
  y << YAML::Key << "batch_size" << YAML::Value << c.train.batch_size;
  y << YAML::EndMap;
  y << YAML::Key << "generate" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "count" << YAML::Value << c.generate.count;
  y << YAML::Key << "previews" << YAML::Value << c.generate.previews;
  y << YAML::EndMap;
  y << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "checkpoint" << YAML::Value << c.eval.checkpoint;
  y << YAML::Key << "ood" << YAML::Value << c.eval.ood;
  y << YAML::Key << "ood_count" << YAML::Value << c.eval.ood_count;
  y << YAML::Key << "ring_factor" << YAML::Value << num(c.eval.ring_factor);
  y << YAML::Key << "box_factor" << YAML::Value << num(c.eval.box_factor);
  y << YAML::Key << "ood_files" << YAML::Value;
  strs(c.eval.ood_files);
  y << YAML::Key << "ood_corruption" << YAML::Value << c.eval.ood_corruption;
  y << YAML::Key << "ood_severity" << YAML::Value << c.eval.ood_severity;
  y << YAML::Key << "ece_bins" << YAML::Value << c.eval.ece_bins;
  y << YAML::EndMap;
  y << YAML::Key << "polytope" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "checkpoint" << YAML::Value << c.polytope.checkpoint;
  y << YAML::Key << "domain_factor" << YAML::Value << num(c.polytope.domain_factor);
  y << YAML::Key << "metric" << YAML::Value << to_string(c.polytope.metric);
  y << YAML::EndMap;
  y << YAML::Key << "diversity" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "reference_checkpoint" << YAML::Value << c.diversity.reference_checkpoint;
  std::vector<std::string> names;
  for (Variant v : c.diversity.variants) names.emplace_back(to_string(v));
  y << YAML::Key << "variants" << YAML::Value;
  strs(names);
  y << YAML::Key << "samples" << YAML::Value << c.diversity.samples;
  y << YAML::EndMap;
  y << YAML::Key << "fig2" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "samples" << YAML::Value << c.fig2.samples;
  y << YAML::EndMap;
  y << YAML::EndMap;
  return std::string(y.c_str()) + "\n";
}

void validate(const ExperimentConfig& c) {
  auto need = [](const std::string& what, const std::string& p) {
    if (!std::filesystem::is_regular_file(p)) throw ConfigError(what + ": file not found: " + p);
  };
  for (const auto& f : c.dataset.files) need("dataset.files", f);
  for (const auto& f : c.dataset.test_files) need("dataset.test_files", f);
  for (const auto& f : c.eval.ood_files) need("eval.ood_files", f);
  if (!c.severity_table.empty()) {
    need("severity_table", c.severity_table);
    try {
      (void)SeverityTable::parse(read_file(c.severity_table));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(c.severity_table + ": " + e.what());
    }
  }
}

Seeds derive_seeds(std::uint64_t seed) {
  const RngStream root(seed);
  Seeds s{root.child(0), root.child(1), root.child(2), 0, 0, root.child(5), root.child(6), root.child(7), root.child(8)};
  RngStream g = root.child(3);
  s.gen = g.next_u64();
  RngStream t = root.child(4);
  s.train = t.next_u64();
  return s;
}

}  // namespace cnc::cli
