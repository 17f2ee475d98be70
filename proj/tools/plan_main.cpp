#include <signal.h>

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "whatif/datagen.hpp"
#include "whatif/diff.hpp"
#include "whatif/edits.hpp"
#include "whatif/json_io.hpp"
#include "whatif/plan.hpp"
#include "whatif/plan_store.hpp"
#include "whatif/service.hpp"

using namespace whatif;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kIo = 1, kInvalid = 2, kSolve = 3 };

// Carries an exit code out of a subcommand.
struct Failure {
  Exit code;
  std::string message;
};

Json read_json(const fs::path& path) {
  try {
    return read_json_file(path);
  } catch (const std::exception& e) {
    throw Failure{kIo, e.what()};
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  try {
    write_text_file(out, text);
  } catch (const std::exception& e) {
    throw Failure{kIo, e.what()};
  }
}

Dataset load_valid_dataset(const fs::path& path) {
  const auto doc = read_json(path);
  Dataset ds;
  try {
    ds = dataset_from_json(doc);
  } catch (const DataError& e) {
    throw Failure{kInvalid, path.string() + ": " + e.what()};
  }
  const auto report = validate_dataset(ds);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << path.string() << ": " << report.violations.size() << " violation(s)";
    for (const auto& v : report.violations) msg << "\n  " << to_string(v.kind) << ": " << v.message;
    throw Failure{kInvalid, msg.str()};
  }
  return ds;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.6g", v);
  return buf;
}

std::string format_metric_delta(const MetricDelta& d) {
  if (d.delta) return format_number(*d.delta);
  std::string s = "n/a (";
  s += d.was_sentinel_in_a ? "sentinel in A" : "";
  if (d.was_sentinel_in_a && d.is_sentinel_in_b) s += ", ";
  s += d.is_sentinel_in_b ? "sentinel in B" : "";
  return s + ")";
}

std::string diff_table(const PlanDiff& d, DiffLevel level) {
  std::ostringstream out;
  out << "diff " << d.a << " -> " << d.b << "\n\nconfig        delta          +           -\n";
  const std::pair<const char*, const CategoryDelta*> cats[] = {
      {"demand", &d.config.demand}, {"inventory", &d.config.inventory},
      {"capacity", &d.config.capacity}, {"holidays", &d.config.holidays}};
  char line[160];
  for (const auto& [name, c] : cats) {
    std::snprintf(line, sizeof line, "%-12s %-14s %-11s %-11s%s\n", name, format_number(c->delta).c_str(),
                  format_number(c->increase).c_str(), format_number(-c->decrease).c_str(),
                  c->became_unlimited || c->became_finite ? "  (unlimited days changed)" : "");
    out << line;
  }
  out << "\nindicator        delta\n";
  for (auto ind : kIndicators) {
    std::snprintf(line, sizeof line, "%-16s %s\n", std::string(to_string(ind)).c_str(),
                  format_metric_delta(d.kpis[static_cast<std::size_t>(ind)]).c_str());
    out << line;
  }
  if (level != DiffLevel::kPlan) {
    out << "\nproduct                  delay          production     inventory      smoothing\n";
    for (const auto& p : d.products) {
      std::snprintf(line, sizeof line, "%-24s %-14s %-14s %-14s %s\n", p.product.c_str(),
                    format_metric_delta(p.delta[0]).c_str(), format_metric_delta(p.delta[1]).c_str(),
                    format_metric_delta(p.delta[2]).c_str(), format_metric_delta(p.delta[3]).c_str());
      out << line;
    }
  }
  return out.str();
}

// Serves until SIGINT or SIGTERM.
int serve(std::optional<Dataset> dataset, const std::string& store_dir, const std::string& host, int port,
          ServiceOptions options) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  std::unique_ptr<PlanStore> store;
  try {
    store = std::make_unique<PlanStore>(store_dir);
  } catch (const std::exception& e) {
    throw Failure{kIo, e.what()};
  }
  Service service(std::move(dataset), *store, std::move(options));
  const int bound = service.bind(host, port);
  if (bound < 0) throw Failure{kIo, "cannot bind " + host + ":" + std::to_string(port)};
  std::cerr << "serving on http://" << host << ":" << bound << " (store " << store_dir << ")" << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    service.stop();
  });
  service.run();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Production planning what-if tool"};
  app.require_subcommand(1);

  std::string dataset_path, config_path, edits_path, out, label, store_dir = default_store_dir().string();

  auto* run = app.add_subcommand("run", "Plan a dataset and print the plan as JSON");
  run->add_option("--dataset", dataset_path, "Dataset JSON")->required();
  run->add_option("--config", config_path, "Plan config JSON (defaults to the dataset's default config)");
  run->add_option("--edits", edits_path, "JSON array of config edits applied on top of the config");
  run->add_option("--label", label, "Plan label");
  run->add_option("--out", out, "Output file (default stdout)");
  std::string dump_lp;
  run->add_option("--dump-lp", dump_lp, "Also write the planning LP in text form to this file");

  std::string plan_a, plan_b, level = "plan", product, format = "json", diff_store;
  auto* diff = app.add_subcommand("diff", "Compare two plans");
  diff->add_option("a", plan_a, "Plan A: a plan JSON file, or an id with --store")->required();
  diff->add_option("b", plan_b, "Plan B")->required();
  diff->add_option("--store", diff_store, "Read plans from this store by id");
  diff->add_option("--level", level, "plan, product or detail")->check(CLI::IsMember({"plan", "product", "detail"}));
  diff->add_option("--product", product, "Product for the detail level");
  diff->add_option("--dataset", dataset_path, "Dataset JSON, needed for the detail level");
  diff->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));
  diff->add_option("--out", out, "Output file (default stdout)");

  std::string host = "127.0.0.1";
  int port = 8080, max_runs = 2, timeout_s = 120;
  std::string cors = "*", static_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--dataset", dataset_path, "Dataset JSON (without it dataset routes answer 503)");
  serve_cmd->add_option("--store", store_dir, "Plan store directory (default $WHATIF_STORE_DIR or ./whatif-store)");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--port", port, "Listen port (0 picks a free port)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--max-concurrent-runs", max_runs, "Plan runs allowed at once")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--timeout", timeout_s, "Per-request planning timeout in seconds")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value");
  serve_cmd->add_option("--static-dir", static_dir, "Serve UI assets from this directory under /");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a dataset for structural problems");
  validate->add_option("dataset", validate_path, "Dataset JSON")->required();

  GeneratorParams gp;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--products", gp.products, "Number of products")->capture_default_str();
  gen->add_option("--factories", gp.factories, "Number of factories")->capture_default_str();
  gen->add_option("--depth", gp.depth, "Longest BOM path in edges")->capture_default_str();
  gen->add_option("--horizon", gp.horizon, "Days")->capture_default_str();
  gen->add_option("--seed", gp.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) {
      const auto ds = load_valid_dataset(dataset_path);
      PlanConfig config = ds.default_config;
      try {
        if (!config_path.empty()) config = config_from_json(read_json(config_path));
        if (!edits_path.empty()) config = apply_edits(ds, config, edits_from_json(read_json(edits_path)));
      } catch (const DataError& e) {
        throw Failure{kInvalid, e.what()};
      } catch (const EditError& e) {
        throw Failure{kInvalid, e.what()};
      }
      Plan p;
      try {
        if (!dump_lp.empty()) {
          std::ostringstream text;
          lp::write_lp(text, build_problem(ds, config).lp);
          emit(text.str(), dump_lp);
        }
        p = plan(ds, config, {}, {std::nullopt, label});
      } catch (const PlanningError& e) {
        throw Failure{e.kind() == PlanningError::Kind::kInvalidConfig ? kInvalid : kSolve, e.what()};
      }
      emit(canonical_dump(to_json(p)), out);
    } else if (*diff) {
      auto load_plan = [&](const std::string& ref) {
        if (!diff_store.empty()) {
          try {
            return PlanStore(diff_store).get(ref);
          } catch (const StoreError& e) {
            throw Failure{e.kind() == StoreError::Kind::kNotFound ? kInvalid : kIo, e.what()};
          }
        }
        try {
          return plan_from_json(read_json(ref));
        } catch (const DataError& e) {
          throw Failure{kInvalid, ref + ": " + e.what()};
        }
      };
      const auto a = load_plan(plan_a);
      const auto b = load_plan(plan_b);
      const auto lvl = diff_level_from_string(level);
      try {
        const auto d = diff_plans(a, b);
        if (format == "table") {
          emit(diff_table(d, lvl), out);
        } else if (lvl == DiffLevel::kDetail) {
          if (product.empty() || dataset_path.empty()) {
            throw Failure{kInvalid, "the detail level needs --product and --dataset"};
          }
          const auto ds = load_valid_dataset(dataset_path);
          const auto slice = detail_slice(ds, a, b, product);
          emit(canonical_dump(diff_to_json(d, lvl, &slice)), out);
        } else {
          emit(canonical_dump(diff_to_json(d, lvl)), out);
        }
      } catch (const DiffError& e) {
        throw Failure{kInvalid, e.what()};
      } catch (const DataError& e) {
        throw Failure{kInvalid, e.what()};
      }
    } else if (*serve_cmd) {
      std::optional<Dataset> ds;
      if (!dataset_path.empty()) ds = load_valid_dataset(dataset_path);
      ServiceOptions options;
      options.max_concurrent_runs = max_runs;
      options.run_timeout = std::chrono::seconds(timeout_s);
      options.cors_origin = cors;
      if (!static_dir.empty()) options.static_dir = fs::path(static_dir);
      return serve(std::move(ds), store_dir, host, port, std::move(options));
    } else if (*validate) {
      const auto ds = load_valid_dataset(validate_path);
      std::cout << validate_path << ": ok (" << ds.products.size() << " products, " << ds.factories.size()
                << " factories, " << ds.default_config.horizon << " days)\n";
    } else if (*gen) {
      Dataset ds;
      try {
        ds = generate_dataset(gp);
      } catch (const std::invalid_argument& e) {
        throw Failure{kInvalid, e.what()};
      }
      emit(canonical_dump(to_json(ds)), out);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
