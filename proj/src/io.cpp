#include "topoproto/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace topoproto::io {

namespace {

constexpr const char* kFeatureMagic = "#topo-proto-features";
constexpr const char* kStateMagic = "#topo-proto-state";
constexpr const char* kScoresMagic = "#topo-proto-scores";

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t line) {
  if (s.empty()) parse_fail(path, line, "empty number field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    parse_fail(path, line, "malformed number '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s, const std::string& path,
                    std::size_t line) {
  if (s.empty()) parse_fail(path, line, "empty integer field");
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) {
    parse_fail(path, line, "malformed integer '" + s + "'");
  }
  return v;
}

RawVector parse_vector(const std::string& s, std::size_t dim,
                       const std::string& path, std::size_t line) {
  const std::vector<std::string> parts = split(s, ',');
  if (parts.size() != dim) {
    parse_fail(path, line,
               "expected " + std::to_string(dim) + " components, got " +
                   std::to_string(parts.size()));
  }
  RawVector v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    v[i] = parse_double(parts[i], path, line);
  }
  return v;
}

std::string join_vector(const RawVector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += format_double(v[i]);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

void check_version(const std::string& header, const char* magic,
                   const std::string& path) {
  if (header.rfind(magic, 0) != 0) {
    throw ParseError(path + ":1: missing '" + std::string(magic) + "' header");
  }
  const std::vector<std::string> parts = split(header, ' ');
  if (parts.size() < 2 || parts[1] != "v1") {
    throw VersionMismatchError(path + ": unsupported version in '" + header +
                               "' (expected v1)");
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<int> TaskFeatures::task_ids() const {
  std::vector<int> out;
  out.reserve(by_task.size());
  for (const auto& [t, classes] : by_task) {
    (void)classes;
    out.push_back(t);
  }
  return out;
}

TaskFeatures load_features(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw ParseError(path + ":1: empty file, missing header");
  }
  ++line_no;
  check_version(line, kFeatureMagic, path);

  const std::vector<std::string> head = split(line, ' ');
  std::size_t dim = 0;
  for (const auto& part : head) {
    if (part.rfind("d=", 0) == 0) {
      dim = static_cast<std::size_t>(parse_int(part.substr(2), path, line_no));
    }
  }
  if (dim < 2) parse_fail(path, line_no, "header needs d=<dim> with dim >= 2");

  TaskFeatures out;
  out.dim = dim;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> parts = split(line, ',');
    if (parts.size() != 3 + dim) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(3 + dim) + " fields, got " +
                     std::to_string(parts.size()));
    }
    const auto sample_id = static_cast<SampleId>(parse_int(parts[0], path, line_no));
    const int task_id = static_cast<int>(parse_int(parts[1], path, line_no));
    const int class_id = static_cast<int>(parse_int(parts[2], path, line_no));
    if (task_id < 0) parse_fail(path, line_no, "task_id must be >= 0");

    RawVector v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = parse_double(parts[3 + i], path, line_no);
    }

    // Cross-task label disjointness is a property of training streams, not
    // of the file format: re-embedding snapshots repeat old classes under a
    // later task id. Fitting enforces disjointness when it matters.
    FeatureSet& fs = out.by_task[task_id][class_id];
    // Uniqueness is per task: the same sample may be re-embedded later.
    for (const auto& [cid, other] : out.by_task[task_id]) {
      if (cid != class_id && other.contains(sample_id)) {
        parse_fail(path, line_no,
                   "duplicate sample id " + std::to_string(sample_id) +
                       " within task " + std::to_string(task_id));
      }
    }
    if (fs.contains(sample_id)) {
      parse_fail(path, line_no,
                 "duplicate sample id " + std::to_string(sample_id) +
                     " within task " + std::to_string(task_id));
    }
    try {
      fs.add(sample_id, normalize(v));
    } catch (const ZeroNormError&) {
      parse_fail(path, line_no, "zero-norm feature vector rejected");
    } catch (const ConfigError& e) {
      parse_fail(path, line_no, e.what());
    }
  }
  return out;
}

void write_features(const std::string& path, std::size_t dim,
                    const std::vector<FeatureRecord>& records) {
  std::ofstream out = open_out(path);
  out << kFeatureMagic << " v1 d=" << dim << "\n";
  for (const auto& rec : records) {
    if (rec.values.size() != dim) {
      throw DimensionMismatchError("feature record for sample " +
                                   std::to_string(rec.sample_id) +
                                   " has wrong dimension");
    }
    out << rec.sample_id << ',' << rec.task_id << ',' << rec.class_id << ','
        << join_vector(rec.values) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void save_state(const classifier::ClassifierState& state,
                const star::AnchorStore& store, const std::string& path) {
  std::ofstream out = open_out(path);
  const auto& cfg = state.config();
  out << kStateMagic << " v1\n";
  out << "[meta]\n";
  out << "dimension=" << state.dimension() << "\n";
  out << "alpha=" << format_double(cfg.alpha) << "\n";
  out << "k_init=" << cfg.k_init << "\n";
  out << "eta1=" << format_double(cfg.soinn.eta1) << "\n";
  out << "eta2=" << format_double(cfg.soinn.eta2) << "\n";
  out << "age_max=" << cfg.soinn.age_max << "\n";
  out << "t_soinn=" << cfg.soinn.t_soinn << "\n";
  out << "rng_seed=" << cfg.soinn.rng_seed << "\n";
  out << "lambda=" << format_double(cfg.lambda) << "\n";

  for (const auto& [cid, model] : state.classes()) {
    out << "[class " << cid << "]\n";
    out << "mean_raw=" << join_vector(model.mean_raw) << "\n";
    for (const auto& [nid, node] : model.topology.nodes()) {
      out << "node=" << nid << ";" << join_vector(node.raw) << "\n";
    }
    for (const auto& [key, age] : model.topology.edges()) {
      out << "edge=" << key.first << ',' << key.second << ';' << age << "\n";
    }
    if (store.has_class(cid)) {
      for (const auto& [nid, anchor] : store.anchors(cid)) {
        out << "anchor=" << nid << ';' << anchor.sample_ref << ';'
            << join_vector(anchor.h_ref) << ';' << join_vector(anchor.delta)
            << "\n";
      }
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

LoadedState load_state(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw ParseError(path + ":1: empty file, missing header");
  }
  ++line_no;
  check_version(line, kStateMagic, path);

  classifier::ClassifierConfig cfg;
  std::size_t dim = 0;
  bool in_meta = false;

  struct PendingClass {
    int class_id = -1;
    RawVector mean_raw;
    soinn::ClassTopology topology;
    std::map<int, star::Anchor> anchors;
    bool has_mean = false;
  };
  std::vector<PendingClass> pending;

  auto current = [&]() -> PendingClass& {
    if (pending.empty()) {
      parse_fail(path, line_no, "entry outside of a [class] section");
    }
    return pending.back();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    if (line == "[meta]") {
      in_meta = true;
      continue;
    }
    if (line.rfind("[class ", 0) == 0) {
      if (line.back() != ']') parse_fail(path, line_no, "malformed section header");
      in_meta = false;
      PendingClass pc;
      pc.class_id = static_cast<int>(
          parse_int(line.substr(7, line.size() - 8), path, line_no));
      pending.push_back(std::move(pc));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, line_no, "expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    if (in_meta) {
      if (key == "dimension") {
        dim = static_cast<std::size_t>(parse_int(value, path, line_no));
      } else if (key == "alpha") {
        cfg.alpha = parse_double(value, path, line_no);
      } else if (key == "k_init") {
        cfg.k_init = static_cast<int>(parse_int(value, path, line_no));
      } else if (key == "eta1") {
        cfg.soinn.eta1 = parse_double(value, path, line_no);
      } else if (key == "eta2") {
        cfg.soinn.eta2 = parse_double(value, path, line_no);
      } else if (key == "age_max") {
        cfg.soinn.age_max = static_cast<int>(parse_int(value, path, line_no));
      } else if (key == "t_soinn") {
        cfg.soinn.t_soinn = static_cast<int>(parse_int(value, path, line_no));
      } else if (key == "rng_seed") {
        cfg.soinn.rng_seed =
            static_cast<std::uint64_t>(parse_int(value, path, line_no));
      } else if (key == "lambda") {
        cfg.lambda = parse_double(value, path, line_no);
      } else {
        parse_fail(path, line_no, "unknown meta key '" + key + "'");
      }
      continue;
    }

    if (dim < 2) parse_fail(path, line_no, "class section before a valid [meta]");

    if (key == "mean_raw") {
      current().mean_raw = parse_vector(value, dim, path, line_no);
      current().has_mean = true;
    } else if (key == "node") {
      const std::vector<std::string> parts = split(value, ';');
      if (parts.size() != 2) parse_fail(path, line_no, "node needs id;coords");
      const int nid = static_cast<int>(parse_int(parts[0], path, line_no));
      try {
        current().topology.add_node(nid, parse_vector(parts[1], dim, path, line_no));
      } catch (const Error& e) {
        parse_fail(path, line_no, e.what());
      }
    } else if (key == "edge") {
      const std::vector<std::string> parts = split(value, ';');
      if (parts.size() != 2) parse_fail(path, line_no, "edge needs a,b;age");
      const std::vector<std::string> ends = split(parts[0], ',');
      if (ends.size() != 2) parse_fail(path, line_no, "edge needs two endpoints");
      try {
        current().topology.add_edge(
            static_cast<int>(parse_int(ends[0], path, line_no)),
            static_cast<int>(parse_int(ends[1], path, line_no)),
            static_cast<int>(parse_int(parts[1], path, line_no)));
      } catch (const Error& e) {
        parse_fail(path, line_no, e.what());
      }
    } else if (key == "anchor") {
      const std::vector<std::string> parts = split(value, ';');
      if (parts.size() != 4) {
        parse_fail(path, line_no, "anchor needs node;sample;h_ref;delta");
      }
      star::Anchor a;
      a.node_id = static_cast<int>(parse_int(parts[0], path, line_no));
      a.sample_ref = static_cast<SampleId>(parse_int(parts[1], path, line_no));
      a.h_ref = parse_vector(parts[2], dim, path, line_no);
      a.delta = parse_vector(parts[3], dim, path, line_no);
      if (!current().topology.has_node(a.node_id)) {
        parse_fail(path, line_no,
                   "anchor references unknown node " + std::to_string(a.node_id));
      }
      const int node_id = a.node_id;
      if (!current().anchors.emplace(node_id, std::move(a)).second) {
        parse_fail(path, line_no,
                   "duplicate anchor for node " + std::to_string(node_id));
      }
    } else {
      parse_fail(path, line_no, "unknown class key '" + key + "'");
    }
  }

  try {
    classifier::ClassifierState state{cfg};
    star::AnchorStore store;
    for (auto& pc : pending) {
      if (!pc.has_mean) {
        throw ParseError(path + ": class " + std::to_string(pc.class_id) +
                         " has no mean_raw entry");
      }
      if (pc.topology.node_count() == 0) {
        throw ParseError(path + ": class " + std::to_string(pc.class_id) +
                         " has no nodes");
      }
      classifier::ClassModel model{pc.class_id, std::move(pc.topology),
                                   pc.mean_raw, normalize(pc.mean_raw)};
      state.insert(std::move(model));
      if (!pc.anchors.empty()) {
        store.set_class(pc.class_id, std::move(pc.anchors));
      }
    }
    return LoadedState{std::move(state), std::move(store)};
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    // invalid hyperparameters, repeated classes, mixed dimensions: the file
    // does not describe a valid state
    throw ParseError(path + ": " + e.what());
  }
}

ScoreTable load_scores(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw ParseError(path + ":1: empty file, missing header");
  }
  ++line_no;
  check_version(line, kScoresMagic, path);

  ScoreTable out;
  const std::vector<std::string> head = split(line, ' ');
  for (const auto& part : head) {
    if (part.rfind("classes=", 0) == 0) {
      for (const auto& c : split(part.substr(8), ',')) {
        out.class_ids.push_back(static_cast<int>(parse_int(c, path, line_no)));
      }
    }
  }
  if (out.class_ids.empty()) {
    parse_fail(path, line_no, "header needs classes=<c1>,<c2>,...");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> parts = split(line, ',');
    if (parts.size() != 1 + out.class_ids.size()) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(1 + out.class_ids.size()) +
                     " fields, got " + std::to_string(parts.size()));
    }
    const auto sid = static_cast<SampleId>(parse_int(parts[0], path, line_no));
    std::vector<double> scores(out.class_ids.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scores[i] = parse_double(parts[1 + i], path, line_no);
    }
    if (!out.rows.emplace(sid, std::move(scores)).second) {
      parse_fail(path, line_no, "duplicate sample id " + std::to_string(sid));
    }
  }
  return out;
}

}  // namespace topoproto::io
