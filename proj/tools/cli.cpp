#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rgi/dataset.hpp"
#include "rgi/estimator.hpp"
#include "rgi/io.hpp"
#include "rgi/metrics.hpp"
#include "rgi/serialize.hpp"

namespace rgi::cli {

namespace {

// Resolved run configuration: built-in defaults, then the config file, then
// explicit flags.
struct Settings {
  RoomConstraints constraints;
  UlaConfig ula;
  SimParams sim;
  RadonGrid grid;
  EstimatorOptions estimator;
  SplitCounts counts = SplitCounts::Desk();
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

[[noreturn]] void Invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); }

SplitCounts ProfileCounts(const std::string& name) {
  if (name == "desk") return SplitCounts::Desk();
  if (name == "paper") return SplitCounts::Paper();
  Invalid("unknown profile '" + name + "' (expected desk or paper)");
}

void UpdateEstimator(const Json& j, EstimatorOptions& o) {
  if (!j.is_object()) Invalid("estimator must be a JSON object");
  const std::map<std::string, double*> reals = {
      {"min_prominence", &o.min_prominence},
      {"sep_theta_deg", &o.sep_theta_deg},
      {"direct_min_amplitude", &o.direct_min_amplitude},
      {"echo_min_amplitude", &o.echo_min_amplitude},
      {"floor_theta_tol_deg", &o.floor_theta_tol_deg},
      {"match_rho_m", &o.match_rho_m},
      {"match_theta_deg", &o.match_theta_deg},
      {"prior_slack_m", &o.prior_slack_m},
      {"prior_slack_deg", &o.prior_slack_deg},
  };
  const std::map<std::string, int*> ints = {{"sep_n", &o.sep_n},
                                            {"max_wall_candidates", &o.max_wall_candidates}};
  const std::map<std::string, bool*> flags = {{"refine", &o.refine},
                                              {"fallback_to_prior", &o.fallback_to_prior}};
  for (const auto& [key, value] : j.items()) {
    if (auto it = reals.find(key); it != reals.end()) {
      if (!value.is_number()) Invalid("estimator." + key + " must be a number");
      *it->second = value.get<double>();
    } else if (auto it2 = ints.find(key); it2 != ints.end()) {
      if (!value.is_number_integer()) Invalid("estimator." + key + " must be an integer");
      *it2->second = value.get<int>();
    } else if (auto it3 = flags.find(key); it3 != flags.end()) {
      if (!value.is_boolean()) Invalid("estimator." + key + " must be a boolean");
      *it3->second = value.get<bool>();
    } else {
      Invalid("estimator: unknown key '" + key + "'");
    }
  }
}

void ApplyConfigFile(const std::string& path, Settings& s) {
  const Json j = ReadJsonFile(path);
  if (!j.is_object()) Invalid(path + ": config must be a JSON object");
  static const std::set<std::string> kKnown = {"seed", "profile", "counts", "jobs", "constraints",
                                               "ula", "sim", "grid", "estimator"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) Invalid(path + ": unknown key '" + key + "'");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) Invalid("seed must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("profile")) {
    if (!j["profile"].is_string()) Invalid("profile must be a string");
    s.counts = ProfileCounts(j["profile"].get<std::string>());
  }
  if (j.contains("counts")) {
    const Json& c = j["counts"];
    if (!c.is_object()) Invalid("counts must be a JSON object");
    for (const auto& [key, value] : c.items()) {
      if (!value.is_number_integer()) Invalid("counts." + key + " must be an integer");
      s.counts[ParseSplit(key)] = value.get<int>();
    }
  }
  if (j.contains("jobs")) {
    if (!j["jobs"].is_number_integer()) Invalid("jobs must be an integer");
    s.jobs = j["jobs"].get<int>();
  }
  if (j.contains("constraints")) Update(j["constraints"], s.constraints);
  if (j.contains("ula")) Update(j["ula"], s.ula);
  if (j.contains("sim")) Update(j["sim"], s.sim);
  // The grid follows the simulation's fs and c unless set explicitly.
  s.grid.fs = s.sim.fs;
  s.grid.c = s.sim.c;
  if (j.contains("grid")) Update(j["grid"], s.grid);
  if (j.contains("estimator")) UpdateEstimator(j["estimator"], s.estimator);
}

std::string Extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  if (!ext.empty()) ext.erase(0, 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

std::string ResolveFormat(const std::string& flag, const std::string& path,
                          const std::vector<std::string>& allowed) {
  std::string fmt = flag.empty() ? Extension(path) : flag;
  if (std::find(allowed.begin(), allowed.end(), fmt) == allowed.end()) {
    if (!flag.empty()) Invalid("unsupported format '" + flag + "'");
    fmt = allowed.front();
  }
  return fmt;
}

// Room fixtures are either one object or an array of objects.
SampledRoom LoadRoomFixture(const std::string& path, std::size_t index) {
  const Json j = ReadJsonFile(path);
  if (j.is_array()) {
    if (index >= j.size()) {
      throw Error(ErrorCode::kNotFound, path + " has no room at index " + std::to_string(index));
    }
    return SampledRoomFromJson(j[index]);
  }
  if (index != 0) throw Error(ErrorCode::kNotFound, path + " holds a single room");
  return SampledRoomFromJson(j);
}

const LabelRecord& FindPrediction(const std::vector<LabelRecord>& preds, const std::string& id) {
  if (id.empty()) {
    if (preds.size() == 1) return preds.front();
    Invalid("the predictions file holds several records; pass --id");
  }
  for (const LabelRecord& r : preds) {
    if (r.sample_id == id) return r;
  }
  throw Error(ErrorCode::kNotFound, "no prediction for sample '" + id + "'");
}

// ---- floor plan export ----------------------------------------------------

struct Plan {
  std::optional<std::array<Point2, 4>> corners;
  Point2 mic = Point2::Zero();
  double floor = 0.0;
  double ceiling = 0.0;
};

Plan PlanFromRoom(const RoomGeometry& room, const Point3& mic) {
  return {SideWallPolygon(room), mic.head<2>(), room.floor_distance, room.ceiling_distance};
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string FloorplanCsv(const Plan& truth, const std::optional<Plan>& estimate) {
  std::ostringstream s;
  s << "series,kind,index,x,y,value\n";
  auto emit = [&s](const char* series, const Plan& p) {
    if (p.corners) {
      for (int i = 0; i < 4; ++i) {
        s << series << ",corner," << i << "," << Num((*p.corners)[i].x()) << ","
          << Num((*p.corners)[i].y()) << ",\n";
      }
    }
    s << series << ",mic,0," << Num(p.mic.x()) << "," << Num(p.mic.y()) << ",\n";
    s << series << ",floor_distance,0,,," << Num(p.floor) << "\n";
    s << series << ",ceiling_distance,0,,," << Num(p.ceiling) << "\n";
  };
  emit("truth", truth);
  if (estimate) emit("estimate", *estimate);
  return s.str();
}

std::string FloorplanSvg(const Plan& truth, const std::optional<Plan>& estimate, double half_width) {
  std::vector<Point2> pts = {truth.mic, {-half_width, 0.0}, {half_width, 0.0}};
  auto add = [&pts](const Plan& p) {
    if (p.corners) pts.insert(pts.end(), p.corners->begin(), p.corners->end());
    pts.push_back(p.mic);
  };
  add(truth);
  if (estimate) add(*estimate);
  double x0 = pts[0].x(), x1 = x0, y0 = pts[0].y(), y1 = y0;
  for (const Point2& p : pts) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  constexpr double kScale = 60.0;  // px per meter
  constexpr double kMargin = 0.5;  // meters
  const double width = (x1 - x0 + 2 * kMargin) * kScale;
  const double height = (y1 - y0 + 2 * kMargin) * kScale + 50.0;
  // SVG y grows downwards; flip so +y (front) is up.
  auto px = [&](const Point2& p) {
    return Num((p.x() - x0 + kMargin) * kScale) + "," + Num((y1 - p.y() + kMargin) * kScale);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(width) << "\" height=\""
    << Num(height) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto polygon = [&](const Plan& p, const char* style) {
    if (!p.corners) return;
    s << "<polygon points=\"";
    for (int i = 0; i < 4; ++i) s << (i ? " " : "") << px((*p.corners)[i]);
    s << "\" " << style << "/>\n";
  };
  polygon(truth, "fill=\"none\" stroke=\"black\" stroke-width=\"2\"");
  if (estimate) polygon(*estimate, "fill=\"none\" stroke=\"red\" stroke-width=\"2\" stroke-dasharray=\"6,4\"");
  s << "<polyline points=\"" << px({-half_width, 0.0}) << " " << px({half_width, 0.0})
    << "\" stroke=\"blue\" stroke-width=\"4\"/>\n";
  auto dot = [&](const Point2& p, const char* color) {
    const std::string xy = px(p);
    const auto comma = xy.find(',');
    s << "<circle cx=\"" << xy.substr(0, comma) << "\" cy=\"" << xy.substr(comma + 1)
      << "\" r=\"4\" fill=\"" << color << "\"/>\n";
  };
  dot(truth.mic, "black");
  if (estimate) dot(estimate->mic, "red");
  const double text_y = (y1 - y0 + 2 * kMargin) * kScale + 20.0;
  s << "<text x=\"10\" y=\"" << Num(text_y) << "\" font-family=\"monospace\" font-size=\"12\">"
    << "truth: floor " << Num(truth.floor) << " m, ceiling " << Num(truth.ceiling) << " m</text>\n";
  if (estimate) {
    s << "<text x=\"10\" y=\"" << Num(text_y + 18.0)
      << "\" font-family=\"monospace\" font-size=\"12\" fill=\"red\">estimate: floor "
      << Num(estimate->floor) << " m, ceiling " << Num(estimate->ceiling) << " m"
      << (estimate->corners ? "" : " (side walls do not close)") << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---- error reporting ------------------------------------------------------

void ReportError(std::ostream& err, std::string_view code, const std::string& message,
                 std::optional<WallId> wall = std::nullopt) {
  Json j;
  j["error"] = code;
  j["message"] = message;
  if (wall) j["wall"] = WallName(*wall);
  err << j.dump() << "\n";
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Room geometry inference from loudspeaker-array RIRs", "rgi"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);

  std::uint64_t seed_flag = 0;
  int jobs_flag = 1;
  std::string out_path;

  // sample-rooms
  auto* sample = app.add_subcommand("sample-rooms", "Sample random rooms and write them as JSON fixtures");
  int room_count = 1;
  auto* sample_seed = sample->add_option("--seed", seed_flag, "Base seed (room i uses seed + i)");
  sample->add_option("--count", room_count, "Number of rooms")->check(CLI::PositiveNumber);
  sample->add_option("--out", out_path, "Output JSON file")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate the array RIRs of a room fixture");
  std::string room_path;
  std::size_t room_index = 0;
  int max_order_flag = 0;
  simulate->add_option("--room", room_path, "Room fixture JSON (object or array)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--index", room_index, "Room index when the fixture is an array");
  auto* max_order_opt = simulate->add_option("--max-order", max_order_flag, "Image-method order");
  simulate->add_option("--out", out_path, "Output RIR container")->required();

  // radon
  auto* radon = app.add_subcommand("radon", "Compute the normalized Radon map of an RIR container");
  std::string rir_path;
  std::string format_flag;
  radon->add_option("--rir", rir_path, "Input RIR container")->required()->check(CLI::ExistingFile);
  radon->add_option("--out", out_path, "Output file")->required();
  radon->add_option("--format", format_flag, "bin, pgm or csv (default: from the extension)")
      ->check(CLI::IsMember({"bin", "pgm", "csv"}));

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Generate a dataset directory (shards + manifest)");
  std::string profile_flag;
  int train_flag = 0, val_flag = 0, test_flag = 0;
  auto* dataset_seed = dataset->add_option("--seed", seed_flag, "Base seed");
  auto* profile_opt = dataset->add_option("--profile", profile_flag, "desk (500/100/100) or paper (50000/5000/5000)")
                          ->check(CLI::IsMember({"desk", "paper"}));
  auto* train_opt = dataset->add_option("--train", train_flag, "Training sample count")->check(CLI::NonNegativeNumber);
  auto* val_opt = dataset->add_option("--val", val_flag, "Validation sample count")->check(CLI::NonNegativeNumber);
  auto* test_opt = dataset->add_option("--test", test_flag, "Test sample count")->check(CLI::NonNegativeNumber);
  auto* jobs_opt = dataset->add_option("--jobs", jobs_flag, "Worker threads")->check(CLI::PositiveNumber);
  dataset->add_option("--out", out_path, "Output directory")->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Run the reference estimator on a map or a dataset split");
  std::string map_path, dataset_dir, split_flag = "test", id_flag;
  bool strict = false;
  auto* map_opt = estimate->add_option("--map", map_path, "Radon map binary")->check(CLI::ExistingFile);
  auto* dataset_opt = estimate->add_option("--dataset", dataset_dir, "Dataset directory")->check(CLI::ExistingDirectory);
  map_opt->excludes(dataset_opt);
  estimate->add_option("--split", split_flag, "Dataset split")->check(CLI::IsMember({"train", "val", "test"}));
  estimate->add_option("--id", id_flag, "Sample id for a single map (default: file stem)");
  estimate->add_flag("--strict", strict, "Fail on a missing wall peak instead of using the prior");
  estimate->add_option("--out", out_path, "Output predictions JSON")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a dataset split");
  std::string predictions_path, table_path;
  evaluate->add_option("--predictions", predictions_path, "Predictions JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--dataset", dataset_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--split", split_flag, "Dataset split")->check(CLI::IsMember({"train", "val", "test"}));
  evaluate->add_option("--out", out_path, "Output report JSON")->required();
  evaluate->add_option("--table", table_path, "Also write the text table to this file");

  // export-floorplan
  auto* floorplan = app.add_subcommand("export-floorplan", "Export true and estimated floor plans as SVG or CSV");
  auto* fp_dataset = floorplan->add_option("--dataset", dataset_dir, "Dataset directory (truth from --id)")
                         ->check(CLI::ExistingDirectory);
  auto* fp_room = floorplan->add_option("--room", room_path, "Room fixture JSON (truth)")->check(CLI::ExistingFile);
  fp_dataset->excludes(fp_room);
  floorplan->add_option("--index", room_index, "Room index when the fixture is an array");
  floorplan->add_option("--id", id_flag, "Sample id");
  floorplan->add_option("--predictions", predictions_path, "Predictions JSON (estimate)")->check(CLI::ExistingFile);
  floorplan->add_option("--format", format_flag, "svg or csv (default: from the extension)")
      ->check(CLI::IsMember({"svg", "csv"}));
  floorplan->add_option("--out", out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    ReportError(err, "UsageError", e.what());
    return 2;
  }

  try {
    Settings s;
    if (!config_path.empty()) ApplyConfigFile(config_path, s);
    auto require_seed = [&](CLI::Option* flag) {
      if (flag->count()) s.seed = seed_flag;
      if (!s.seed) Invalid("a seed is required (--seed or \"seed\" in the config file)");
      return *s.seed;
    };

    if (sample->parsed()) {
      const std::uint64_t base = require_seed(sample_seed);
      Json rooms = Json::array();
      for (int i = 0; i < room_count; ++i) {
        const SampledRoom r = SampleRoom(s.constraints, base + static_cast<std::uint64_t>(i));
        Json j;
        j["seed"] = base + static_cast<std::uint64_t>(i);
        j.update(ToJson(r));
        j["label"] = LabelsToJson(LabelsFromRoom(r.room, r.mic));
        rooms.push_back(j);
      }
      WriteJsonFile(out_path, rooms);
    } else if (simulate->parsed()) {
      if (max_order_opt->count()) s.sim.max_order = max_order_flag;
      const SampledRoom r = LoadRoomFixture(room_path, room_index);
      WriteRirSet(out_path, SimulateRirs(r.room, r.mic, s.ula, r.absorption, s.sim));
    } else if (radon->parsed()) {
      const std::string fmt = ResolveFormat(format_flag, out_path, {"bin", "pgm", "csv"});
      const RirSet rirs = ReadRirSet(rir_path);
      const RadonMap map = ComputeRadonMap(rirs, s.ula, s.grid);
      if (fmt == "pgm") {
        WriteRadonPgm(out_path, map);
      } else if (fmt == "csv") {
        WriteRadonCsv(out_path, map);
      } else {
        WriteRadonMap(out_path, map);
      }
    } else if (dataset->parsed()) {
      DatasetConfig cfg;
      cfg.base_seed = require_seed(dataset_seed);
      cfg.counts = profile_opt->count() ? ProfileCounts(profile_flag) : s.counts;
      if (train_opt->count()) cfg.counts.train = train_flag;
      if (val_opt->count()) cfg.counts.val = val_flag;
      if (test_opt->count()) cfg.counts.test = test_flag;
      cfg.constraints = s.constraints;
      cfg.ula = s.ula;
      cfg.sim = s.sim;
      cfg.grid = s.grid;
      const int jobs = jobs_opt->count() ? jobs_flag : s.jobs;
      const DatasetManifest m = GenerateDataset(cfg, out_path, jobs);
      out << "wrote " << m.records.size() << " samples to " << out_path << "\n";
    } else if (estimate->parsed()) {
      EstimatorOptions opt = s.estimator;
      opt.fallback_to_prior = !strict;
      std::vector<LabelRecord> records;
      auto run = [&](const RadonMap& map, const std::string& id) {
        try {
          records.push_back({id, kReferenceEstimatorName, map.grid.Hash(), EstimateLabels(map, s.constraints, opt)});
        } catch (const Error& e) {
          throw Error(e.code(), id + ": " + e.what(), e.wall());
        }
      };
      if (!map_path.empty()) {
        run(ReadRadonMap(map_path), id_flag.empty() ? std::filesystem::path(map_path).stem().string() : id_flag);
      } else if (!dataset_dir.empty()) {
        const DatasetManifest m = LoadManifest(dataset_dir);
        for (const SampleRecord* r : m.SplitRecords(ParseSplit(split_flag))) run(ReadSample(m, r->id).map, r->id);
      } else {
        Invalid("estimate needs --map or --dataset");
      }
      WritePredictions(out_path, records);
    } else if (evaluate->parsed()) {
      const DatasetManifest m = LoadManifest(dataset_dir);
      const Split split = ParseSplit(split_flag);
      const std::string grid_hash = m.config.grid.Hash();
      std::vector<RoomError> errors;
      for (const LabelRecord& p : ReadPredictions(predictions_path)) {
        const SampleRecord& r = m.Find(p.sample_id);
        if (r.split != split) Invalid("prediction " + p.sample_id + " is not in the " + split_flag + " split");
        if (p.grid_hash != grid_hash) {
          throw Error(ErrorCode::kGridMismatch, "prediction " + p.sample_id + " was made on grid " +
                                                    p.grid_hash + ", dataset grid is " + grid_hash);
        }
        errors.push_back(ComputeRoomError(r.sample.room, InferRoom(p.labels)));
      }
      const AggregateReport report = Aggregate(errors);
      Json j = ReportToJson(report);
      j["split"] = split_flag;
      WriteJsonFile(out_path, j);
      const std::string table = RenderReportTable(report);
      if (!table_path.empty()) io::WriteFileAtomic(table_path, table);
      out << table;
    } else if (floorplan->parsed()) {
      const std::string fmt = ResolveFormat(format_flag, out_path, {"svg", "csv"});
      Plan truth;
      if (!dataset_dir.empty()) {
        if (id_flag.empty()) Invalid("--dataset needs --id");
        const SampleRecord& r = LoadManifest(dataset_dir).Find(id_flag);
        truth = PlanFromRoom(r.sample.room, r.sample.mic.position);
      } else if (!room_path.empty()) {
        const SampledRoom r = LoadRoomFixture(room_path, room_index);
        truth = PlanFromRoom(r.room, r.mic.position);
      } else {
        Invalid("export-floorplan needs --dataset or --room");
      }
      std::optional<Plan> est;
      if (!predictions_path.empty()) {
        const LabelRecord& p = FindPrediction(ReadPredictions(predictions_path), id_flag);
        const LabelVector& l = p.labels;
        est = PlanFromRoom(InferRoom(l), Point3(l.mic.x(), l.mic.y(), 0.0));
      }
      io::WriteFileAtomic(out_path, fmt == "csv" ? FloorplanCsv(truth, est)
                                                 : FloorplanSvg(truth, est, s.ula.HalfWidth()));
    }
  } catch (const Error& e) {
    ReportError(err, ErrorCodeName(e.code()), e.what(), e.wall());
    return 1;
  } catch (const std::exception& e) {
    ReportError(err, "Internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace rgi::cli
