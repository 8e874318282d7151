#pragma once

#include <invsynth/eval.hpp>
#include <invsynth/vcgen.hpp>

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace invsynth {

/// One external solver invocation. A `{file}` argument switches from piping
/// the script on stdin to passing a temporary file.
struct solver_command
{
  std::string name;
  std::vector<std::string> argv;

  bool uses_file() const;
};

struct solver_config
{
  std::vector<solver_command> solvers;
  int timeout_ms = 3000;
  int_semantics semantics = int_semantics::unbounded;
  /// Run every solver on every query and raise solver_integrity_error when
  /// one proves what another refutes. Without it the first conclusive
  /// answer stops the search.
  bool cross_check = true;

  /// z3 on stdin, 3 s timeout.
  static solver_config defaults();
  /// `INVSYNTH_SOLVERS` ("z3 -in -smt2;cvc5 --lang smt2 {file}") replaces
  /// the solver list when set.
  static solver_config from_environment(solver_config base = defaults());
  /// {"solvers": [{"name": .., "command": [..]}], "timeout_ms": ..,
  ///  "semantics": "unbounded"|"wrap32", "cross_check": ..}
  static solver_config from_json_file(const std::string &path, solver_config base = defaults());
};

/// Parses "z3 -in -smt2" into a command named after its executable.
solver_command parse_solver_command(const std::string &line);

enum class smt_logic
{
  qf_lia,
  qf_nia,
  lia,
  nia,
  qf_bv,
  bv
};

const char *to_string(smt_logic l);
smt_logic select_logic(const verification_condition &vc, int_semantics semantics);

/// SMT-LIB 2.6 script asserting the negation of the formula, followed by
/// (check-sat) and (get-model). Universal quantifiers that become
/// existential under the negation are replaced by fresh constants; the
/// remaining ones are emitted as `forall`.
std::string emit_smtlib(const verification_condition &vc, const solver_config &config);

enum class check_status
{
  proved,
  refuted,
  unknown,
  timeout
};

const char *to_string(check_status s);

struct check_result
{
  check_status status = check_status::unknown;
  /// Counterexample for `refuted`, over the formula's free variables and the
  /// constants standing for eliminated quantifiers.
  valuation model;
  /// For `refuted`: whether the built-in evaluator confirmed that the model
  /// falsifies the formula. Empty when the evaluator could not decide
  /// (quantifiers, values outside its range).
  std::optional<bool> model_confirmed;
  std::string solver;
  double elapsed_ms = 0;
  std::string detail;
};

/// Raw outcome of running one process.
struct process_result
{
  bool timed_out = false;
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Spawns argv[0] (PATH lookup), writes `input` to its stdin and collects
/// stdout/stderr, killing it after `timeout_ms`. Throws solver_spawn_error
/// when the executable cannot be started.
process_result run_process(const std::vector<std::string> &argv, const std::string &input, int timeout_ms);

/// Checks validity with the configured solvers (see solver_config for the
/// order and cross-check policy). A `sat` model that the evaluator shows to
/// satisfy the formula is reported as `unknown`.
check_result check_validity(const verification_condition &vc, const solver_config &config);

/// Solver front end with a thread-safe result cache keyed by script text.
class solver
{
public:
  explicit solver(solver_config config = solver_config::defaults()) : config_(std::move(config)) {}

  check_result check(const verification_condition &vc);

  const solver_config &config() const { return config_; }
  std::size_t queries() const;    ///< calls to check()
  std::size_t cache_hits() const;

private:
  solver_config config_;
  mutable std::mutex mutex_;
  std::map<std::string, check_result> cache_;
  std::size_t queries_ = 0;
  std::size_t hits_ = 0;
};

} // namespace invsynth
