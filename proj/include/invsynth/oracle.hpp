#pragma once

#include <invsynth/smt.hpp>

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace invsynth {

struct syntax_report
{
  std::size_t candidate_id = 0;
  std::string source;
  std::string key; ///< normalized key within the checked set
  std::string message;
};

struct obligation_record
{
  vc_kind kind = vc_kind::establishment;
  std::size_t target = 0;
  source_location location;
  check_result result;

  bool proved() const { return result.status == check_status::proved; }
};

/// Per-candidate outcome of the establishment and preservation checks.
struct candidate_status
{
  std::size_t id = 0;
  std::string source;
  bool established = false;
  bool preserved = false;
};

struct oracle_verdict
{
  bool success = false;
  std::optional<syntax_report> syntax_error;
  /// Candidates failing establishment or preservation-under-all.
  candidate_set blamed;
  std::vector<candidate_status> statuses;
  std::vector<obligation_record> obligations;

  /// Valid loop invariants that do not prove the assertions.
  bool inductive_but_insufficient() const
  {
    return !success && !syntax_error && blamed.empty();
  }
};

struct oracle_options
{
  /// Obligations discharged concurrently within one check.
  std::size_t jobs = 1;
  /// Try preservation with only the target assumed before assuming the
  /// whole set. Same verdict, fewer distinct solver queries.
  bool self_inductive_first = true;
};

/// The verification oracle: checks A(P, I) and blames candidates.
class oracle
{
public:
  explicit oracle(solver_config config = solver_config::defaults(), oracle_options opt = {});
  oracle(std::shared_ptr<solver> shared, oracle_options opt = {});
  virtual ~oracle() = default;

  virtual oracle_verdict check(const program &p, const candidate_set &candidates);

  /// Number of check() calls so far.
  std::size_t calls() const { return calls_.load(); }
  solver &backend() { return *solver_; }

private:
  std::vector<check_result> discharge(const std::vector<verification_condition> &vcs);

  std::shared_ptr<solver> solver_;
  oracle_options opt_;
  std::atomic<std::size_t> calls_{0};
};

/// The first candidate that does not parse or mentions a variable not
/// visible at the loop head.
std::optional<syntax_report> first_syntax_error(const program &p, const candidate_set &candidates);

/// Verifier-style feedback used as the repair prompt's error text.
std::string render_feedback(const program &p, const oracle_verdict &v);

} // namespace invsynth
