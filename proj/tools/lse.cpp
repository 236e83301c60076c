#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lse/lse.hpp"

namespace fs = std::filesystem;
using namespace lse;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kInput = 2, kConsistency = 3 };

// Keys accepted both as --flags and in --config files.
const std::vector<std::string> kSettingKeys = {"model",    "dim",       "loss",       "margin",   "norm",
                                               "lr",       "batch-size", "negatives", "max-steps", "eval-every",
                                               "patience", "seed",      "sampling",   "tie",      "threads"};

struct RunSettings {
  std::string profile = "none";
  ModelKind model = ModelKind::lse_d;
  std::size_t dim = 200;
  TrainConfig train;
};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for '" + key + "': '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("bad value for '" + key + "': '" + value + "' (expected true/false)");
}

void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  auto& c = s.train;
  if (key == "model") {
    s.model = parse_model_kind(value);
  } else if (key == "dim") {
    s.dim = parse_number<std::size_t>(key, value);
  } else if (key == "loss") {
    c.loss = parse_loss_kind(value);
  } else if (key == "margin") {
    c.margin = parse_number<double>(key, value);
  } else if (key == "norm") {
    c.norm = parse_number<int>(key, value);
  } else if (key == "lr" || key == "learning-rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "batch-size") {
    c.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "negatives") {
    c.sampler.negatives_per_positive = parse_number<std::size_t>(key, value);
  } else if (key == "max-steps") {
    c.max_steps = parse_number<std::size_t>(key, value);
  } else if (key == "eval-every") {
    c.eval_every = parse_number<std::size_t>(key, value);
  } else if (key == "patience") {
    c.patience = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "sampling") {
    c.sampler.mode = parse_corruption_mode(value);
  } else if (key == "tie") {
    c.tie = parse_tie_policy(value);
  } else if (key == "threads") {
    c.eval_threads = parse_number<std::size_t>(key, value);
  } else if (key == "filter-negatives") {
    c.sampler.filter_false_negatives = parse_bool(key, value);
  } else if (key == "normalize-entities") {
    c.normalize_entities = parse_bool(key, value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

void apply_config_file(RunSettings& s, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(detail::trim(body.substr(0, eq)));
    const std::string value(detail::trim(body.substr(eq + 1)));
    try {
      apply_setting(s, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string describe(const RunSettings& s) {
  const auto& c = s.train;
  std::ostringstream os;
  os << "profile=" << s.profile << " model=" << to_string(s.model) << " dim=" << s.dim << " loss=" << to_string(c.loss)
     << " margin=" << c.margin << " norm=" << c.norm << " lr=" << c.learning_rate << " batch-size=" << c.batch_size
     << " negatives=" << c.sampler.negatives_per_positive << " max-steps=" << c.max_steps
     << " eval-every=" << c.eval_every << " patience=" << c.patience << " seed=" << c.seed
     << " sampling=" << to_string(c.sampler.mode)
     << " filter-negatives=" << (c.sampler.filter_false_negatives ? "true" : "false")
     << " normalize-entities=" << (c.normalize_entities ? "true" : "false") << " tie=" << to_string(c.tie)
     << " threads=" << c.eval_threads;
  return os.str();
}

// Flags shared by commands that read split files.
struct SplitArgs {
  std::string data_dir;
  std::string train, valid, test;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--data,--pattern-data", data_dir, "Directory with train.txt / valid.txt / test.txt");
    cmd.add_option("--train", train, "Training split (overrides --data)");
    cmd.add_option("--valid", valid, "Validation split (overrides --data)");
    cmd.add_option("--test", test, "Test split (overrides --data)");
  }

  // Explicit paths must exist; files under --data are optional except train
  // when `required` names it.
  std::optional<fs::path> path_of(const std::string& split, bool required) const {
    const std::string& explicit_path = split == "train" ? train : split == "valid" ? valid : test;
    if (!explicit_path.empty()) {
      if (!fs::exists(explicit_path)) throw IoError("no such file: " + explicit_path);
      return fs::path(explicit_path);
    }
    if (!data_dir.empty()) {
      const fs::path p = fs::path(data_dir) / (split + ".txt");
      if (fs::exists(p)) return p;
      if (required) throw IoError("no such file: " + p.string());
      return std::nullopt;
    }
    if (required) throw ConfigError("no " + split + " split given (use --data DIR or --" + split + " FILE)");
    return std::nullopt;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto t = std::string(detail::trim(item));
    if (t.empty()) continue;
    if (t != "train" && t != "valid" && t != "test") {
      throw ConfigError("unknown split '" + t + "' (expected train, valid, test)");
    }
    out.push_back(t);
  }
  return out;
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LSE_OUTPUT_DIR"); env && *env) return env;
  return "lse_out";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failure: " + path.string());
}

std::string storage_banner(ModelKind kind, std::size_t n_e, std::size_t n_r, std::size_t d) {
  const std::size_t ent = n_e * d;
  const std::size_t rel = n_r * (uses_matrix(kind) ? d * d : d);
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "parameters: entities n_e*d = %zu, relations %s = %zu, total %zu doubles (%.1f MiB)", ent,
                uses_matrix(kind) ? "n_r*d^2" : "n_r*d", rel, ent + rel,
                static_cast<double>(ent + rel) * 8.0 / (1024.0 * 1024.0));
  return buf;
}

std::string relation_names(const Vocabulary& v, const std::vector<RelationId>& rels) {
  std::string out;
  for (std::size_t i = 0; i < rels.size(); ++i) {
    if (i) out += ',';
    out += v.relation_name(rels[i]);
  }
  return out;
}

// --- commands ---------------------------------------------------------------

struct SynthArgs {
  std::string pattern = "symmetric";
  std::size_t entities = 40;
  std::size_t facts = 200;
  double holdout = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  SynthOptions opt;
  opt.pattern = parse_synth_pattern(a.pattern);
  opt.num_entities = a.entities;
  opt.num_facts = a.facts;
  opt.holdout = a.holdout;
  opt.seed = a.seed;
  const auto splits = generate_synthetic(opt);
  const fs::path dir = output_dir(a.out);
  ensure_dir(dir);
  write_split(dir / "train.txt", splits.train);
  write_split(dir / "valid.txt", splits.valid);
  write_split(dir / "test.txt", splits.test);
  std::cout << "synth " << a.pattern << ": train " << splits.train.size() << ", valid " << splits.valid.size()
            << ", test " << splits.test.size() << " -> " << dir.string() << '\n';
  return kOk;
}

struct TrainArgs {
  SplitArgs splits;
  std::string profile;
  std::string config;
  std::map<std::string, std::string> values;
  bool filter_negatives = false;
  bool normalize_entities = false;
  std::string out;
};

RunSettings resolve_settings(const TrainArgs& a, const CLI::App& cmd) {
  RunSettings s;
  if (!a.profile.empty()) {
    const Profile p = profile_by_name(a.profile);
    s.profile = p.name;
    s.dim = p.dim;
    s.train = p.train;
  }
  if (!a.config.empty()) apply_config_file(s, a.config);
  for (const auto& key : kSettingKeys) {
    if (cmd.get_option("--" + key)->count() > 0) apply_setting(s, key, a.values.at(key));
  }
  if (a.filter_negatives) s.train.sampler.filter_false_negatives = true;
  if (a.normalize_entities) s.train.normalize_entities = true;
  if (s.dim == 0) throw ConfigError("dim must be >= 1");
  if (s.train.eval_threads == 0) throw ConfigError("threads must be >= 1");
  s.train.validate();
  if (s.train.normalize_entities && s.model != ModelKind::transe) {
    throw ConfigError("--normalize-entities is only available for transe");
  }
  return s;
}

int cmd_train(const TrainArgs& a, const CLI::App& cmd) {
  const RunSettings s = resolve_settings(a, cmd);
  const auto train_path = a.splits.path_of("train", true);
  const auto valid_path = a.splits.path_of("valid", false);
  const auto test_path = a.splits.path_of("test", false);

  const Dataset data = build_dataset(load_split(*train_path), valid_path ? load_split(*valid_path) : std::vector<RawTriple>{},
                                     test_path ? load_split(*test_path) : std::vector<RawTriple>{});
  if (data.train.empty()) throw ConfigError("training split is empty: " + train_path->string());

  std::cout << "lse train: " << describe(s) << '\n';
  std::cout << "data: entities=" << data.num_entities() << " relations=" << data.num_relations()
            << " train=" << data.train.size() << " valid=" << data.valid.size() << " test=" << data.test.size() << '\n';
  std::cout << storage_banner(s.model, data.num_entities(), data.num_relations(), s.dim) << '\n';
  print_warnings(std::cerr, data.warnings);

  const fs::path dir = output_dir(a.out);
  ensure_dir(dir);
  std::ofstream log_file(dir / "train.log");
  if (!log_file) throw IoError("cannot write " + (dir / "train.log").string());
  log_file << "# " << describe(s) << '\n';

  struct Tee : std::streambuf {
    std::streambuf* a;
    std::streambuf* b;
    Tee(std::streambuf* x, std::streambuf* y) : a(x), b(y) {}
    int overflow(int c) override {
      if (c == EOF) return !EOF;
      return a->sputc(static_cast<char>(c)) == EOF || b->sputc(static_cast<char>(c)) == EOF ? EOF : c;
    }
    int sync() override { return a->pubsync() | b->pubsync(); }
  } tee(std::cout.rdbuf(), log_file.rdbuf());
  std::ostream log(&tee);

  const TrainResult result = train(data, s.model, s.dim, s.train, &log);
  log.flush();

  const fs::path ckpt_path = dir / "checkpoint.lsekge";
  save_checkpoint(result.best, ckpt_path);
  std::cout << "steps=" << result.steps_run << " best_step=" << result.best.step
            << (result.stopped_early ? " (early stop)" : "") << (result.diverged ? " (diverged)" : "") << '\n';
  std::cout << "sampler: draws=" << result.sampler_counters.draws << " redraws=" << result.sampler_counters.redraws
            << " cap_hits=" << result.sampler_counters.cap_hits << '\n';
  std::cout << "checkpoint: " << ckpt_path.string() << '\n';

  const FilterIndex filter = build_filter_index({&data.train, &data.valid, &data.test}, {"train", "valid", "test"});
  const auto eval = evaluate(result.best.params, data.test, filter, {s.train.norm, s.train.tie, s.train.eval_threads});
  std::cout << "test split, filter=train,valid,test\n" << render_text(eval.metrics);
  write_text(dir / "report.txt", render_structured(eval.metrics));
  return result.diverged ? kInternal : kOk;
}

struct EvalArgs {
  SplitArgs splits;
  std::string checkpoint;
  std::string filter_with = "train,valid,test";
  std::string tie;
  std::size_t threads = 1;
  std::string out;
  std::string report;
};

TripleSet encode_file(const Vocabulary& v, const fs::path& path) {
  try {
    return encode_split(v, load_split(path));
  } catch (const ConsistencyError& e) {
    throw ConsistencyError(path.string() + ": " + e.what() + " (not in the checkpoint vocabulary)");
  }
}

int cmd_eval(const EvalArgs& a, const CLI::App& cmd) {
  const bool filter_explicit = cmd.get_option("--filter-with")->count() > 0;
  const auto filter_splits = split_list(a.filter_with);
  if (a.threads == 0) throw ConfigError("threads must be >= 1");
  std::optional<TiePolicy> tie;
  if (!a.tie.empty()) tie = parse_tie_policy(a.tie);
  const auto test_path = a.splits.path_of("test", true);
  std::map<std::string, fs::path> filter_paths;
  for (const auto& name : filter_splits) {
    if (auto p = a.splits.path_of(name, filter_explicit)) filter_paths[name] = *p;
  }

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const TripleSet eval_set = encode_file(ckpt.vocabulary, *test_path);
  std::vector<TripleSet> sets;
  std::vector<std::string> names;
  for (const auto& name : filter_splits) {
    if (!filter_paths.count(name)) continue;
    sets.push_back(encode_file(ckpt.vocabulary, filter_paths.at(name)));
    names.push_back(name);
  }
  std::vector<const TripleSet*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  const FilterIndex filter = build_filter_index(std::span<const TripleSet* const>(ptrs), names);

  const fs::path dir = output_dir(a.out);
  const fs::path report_path = a.report.empty() ? dir / "eval_report.txt" : fs::path(a.report);

  const auto result =
      evaluate(ckpt.params, eval_set, filter, {ckpt.config.norm, tie.value_or(ckpt.config.tie), a.threads});
  std::cout << "checkpoint: " << a.checkpoint << " (" << to_string(ckpt.params.kind) << ", d=" << ckpt.params.dim
            << ", step " << ckpt.step << ")\n";
  std::cout << "eval: " << test_path->string() << ", filter=";
  for (std::size_t i = 0; i < names.size(); ++i) std::cout << (i ? "," : "") << names[i];
  std::cout << (names.empty() ? "none" : "") << '\n';
  std::cout << render_text(result.metrics);

  if (report_path.has_parent_path()) ensure_dir(report_path.parent_path());
  write_text(report_path, render_structured(result.metrics));
  std::cout << "report: " << report_path.string() << '\n';
  return kOk;
}

struct InspectArgs {
  SplitArgs splits;
  std::string checkpoint;
  std::string patterns_from = "train";
  double symmetric_threshold = 0.8;
  double inverse_threshold = 0.8;
  double composition_threshold = 0.8;
  std::uint64_t seed = 0;
};

int cmd_inspect(const InspectArgs& a) {
  const auto sources = split_list(a.patterns_from);
  if (sources.empty()) throw ConfigError("--patterns-from names no split");
  std::vector<fs::path> paths;
  for (const auto& name : sources) paths.push_back(*a.splits.path_of(name, true));

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const auto& p = ckpt.params;
  TripleSet triples;
  for (const auto& path : paths) {
    const auto part = encode_file(ckpt.vocabulary, path);
    triples.insert(triples.end(), part.begin(), part.end());
  }
  dedup_in_place(triples);

  PatternOptions opt;
  opt.inverse_threshold = a.inverse_threshold;
  opt.symmetric_threshold = a.symmetric_threshold;
  opt.composition_threshold = a.composition_threshold;
  opt.seed = a.seed;
  const PatternStats patterns = detect_patterns(triples, p.num_relations, opt);
  const LemmaReport report = lemma_diagnostics(p, patterns, a.symmetric_threshold);
  const auto& v = ckpt.vocabulary;

  std::printf("checkpoint: kind=%s dim=%zu step=%zu entities=%zu relations=%zu\n", std::string(to_string(p.kind)).c_str(),
              p.dim, ckpt.step, p.num_entities, p.num_relations);
  std::printf("patterns: from=%s triples=%zu paths=%zu path_cap_reached=%s\n", a.patterns_from.c_str(), triples.size(),
              patterns.paths_enumerated, patterns.path_cap_reached ? "yes" : "no");
  std::printf("mean_entity_norm=%.6g\n", report.mean_entity_norm);
  for (std::size_t r = 0; r < p.num_relations; ++r) {
    if (patterns.triple_count[r] == 0) continue;
    std::printf("relation %s triples=%zu symmetry_score=%.6g\n", v.relation_name(static_cast<RelationId>(r)).c_str(),
                patterns.triple_count[r], patterns.symmetry_score[r]);
  }
  const char* measure = p.kind == ModelKind::lse     ? "frobenius/sqrt(d)"
                        : p.kind == ModelKind::lse_d ? "max_i"
                        : p.kind == ModelKind::transe ? "l2"
                                                      : "none";
  std::printf("residual measure: %s\n", measure);
  for (const auto& r : report.symmetric) {
    std::printf("symmetric %s score=%.6g residual=%.6g", relation_names(v, r.relations).c_str(), r.detection_score,
                r.residual);
    if (r.norm_ratio) std::printf(" r_norm=%.6g norm_ratio=%.6g", r.residual, *r.norm_ratio);
    std::printf("\n");
  }
  for (const auto& r : report.inverse) {
    std::printf("inverse %s score=%.6g residual=%.6g\n", relation_names(v, r.relations).c_str(), r.detection_score,
                r.residual);
  }
  for (const auto& r : report.composition) {
    std::printf("composition %s confidence=%.6g residual=%.6g\n", relation_names(v, r.relations).c_str(),
                r.detection_score, r.residual);
  }
  if (report.symmetric.empty() && report.inverse.empty() && report.composition.empty()) {
    std::printf("no patterns above threshold\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-sensitive knowledge graph embeddings: synth | train | eval | inspect"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic graph entailing one relation pattern");
  synth->add_option("--pattern", synth_args.pattern, "symmetric, inverse, composition or mixed")->capture_default_str();
  synth->add_option("--entities", synth_args.entities, "Number of entities")->capture_default_str();
  synth->add_option("--facts", synth_args.facts, "Number of base facts")->capture_default_str();
  synth->add_option("--holdout", synth_args.holdout, "Fraction of entailed triples held out")->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_args.out, "Output directory (default $LSE_OUTPUT_DIR or lse_out)");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, log and report");
  train_args.splits.add_to(*train_cmd);
  train_cmd->add_option("--profile", train_args.profile, "paper or desk");
  train_cmd->add_option("--config", train_args.config, "key=value settings file");
  for (const auto& key : kSettingKeys) train_cmd->add_option("--" + key, train_args.values[key]);
  train_cmd->add_flag("--filter-negatives", train_args.filter_negatives, "Redraw negatives found in train");
  train_cmd->add_flag("--normalize-entities", train_args.normalize_entities, "Unit-norm entity rows (transe)");
  train_cmd->add_option("--out", train_args.out, "Output directory (default $LSE_OUTPUT_DIR or lse_out)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval_args.splits.add_to(*eval_cmd);
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--filter-with", eval_args.filter_with, "Splits forming the filter")->capture_default_str();
  eval_cmd->add_option("--tie", eval_args.tie, "Tie policy (default: the checkpoint's)");
  eval_cmd->add_option("--threads", eval_args.threads, "Evaluation threads")->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "Output directory (default $LSE_OUTPUT_DIR or lse_out)");
  eval_cmd->add_option("--report", eval_args.report, "Structured report path (default OUT/eval_report.txt)");

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "Relation-pattern residuals of a checkpoint");
  inspect_args.splits.add_to(*inspect);
  inspect->add_option("--checkpoint", inspect_args.checkpoint, "Checkpoint file")->required();
  inspect->add_option("--patterns-from", inspect_args.patterns_from, "Splits scanned for patterns")
      ->capture_default_str();
  inspect->add_option("--symmetric-threshold", inspect_args.symmetric_threshold)->capture_default_str();
  inspect->add_option("--inverse-threshold", inspect_args.inverse_threshold)->capture_default_str();
  inspect->add_option("--composition-threshold", inspect_args.composition_threshold)->capture_default_str();
  inspect->add_option("--seed", inspect_args.seed, "Seed for path sampling")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*synth) return cmd_synth(synth_args);
    if (*train_cmd) return cmd_train(train_args, *train_cmd);
    if (*eval_cmd) return cmd_eval(eval_args, *eval_cmd);
    if (*inspect) return cmd_inspect(inspect_args);
  } catch (const ConsistencyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConsistency;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
