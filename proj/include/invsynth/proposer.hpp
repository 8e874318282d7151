#pragma once

#include <invsynth/program.hpp>

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace invsynth {

// --- prompts -------------------------------------------------------------------

struct prompt_template
{
  std::string name;
  std::string body;

  bool needs_error() const;
};

/// "M1", "M2", "Mr" (shipped in prompts/, compiled in), or a path to a
/// template file. Throws invsynth::error when the body lacks "{{ code }}".
prompt_template load_template(const std::string &name_or_path);
prompt_template builtin_template(const std::string &name);

/// Substitutes "{{ code }}" and "{{ error }}". Throws
/// missing_placeholder_value when the template needs an error text and none
/// is given; an error text for a template without the placeholder is
/// dropped with a warning.
std::string render_prompt(
  const prompt_template &t, const std::string &code, const std::optional<std::string> &error = std::nullopt);

/// 64-bit FNV-1a of the prompt, as 16 lowercase hex digits.
std::string prompt_hash(const std::string &prompt);

// --- extraction ------------------------------------------------------------------

/// Candidates from the `loop invariant e;` clauses of the last fenced code
/// block, conjunctions split into their parts, in order, deduplicated.
/// Never throws.
candidate_set extract_invariants(const std::string &response);

/// A response carrying `candidates` in one annotation code block.
std::string render_response(const std::vector<std::string> &invariants);

// --- offline enumeration ---------------------------------------------------------

/// Candidates from a fixed grammar over the loop-head variables and the
/// program's literals (see docs/grammar.md), smallest first, shuffled by
/// `seed` within each size class, truncated to `budget`.
candidate_set enumerate_candidates(const program &p, std::uint64_t seed, std::size_t budget);

// --- providers ---------------------------------------------------------------------

struct generation_config
{
  std::size_t completions = 15;
  double temperature = 0.7;
  int max_tokens = 2000;
  std::string model;
  std::uint64_t seed = 0;
};

struct generation_request
{
  std::string benchmark;
  std::string prompt;
  const program *prog = nullptr;
  /// Completion indices first_index .. first_index + count - 1. Sampling
  /// uses 0 .. N_s - 1; repair round r uses N_s + r - 1.
  std::size_t first_index = 0;
  std::size_t count = 1;
  bool repair = false;
  generation_config config;
};

struct completion
{
  std::size_t index = 0;
  std::string raw;
  candidate_set extracted;
  std::string provider;
  double latency_ms = 0;
};

class provider
{
public:
  virtual ~provider() = default;
  virtual std::string name() const = 0;

  /// Exactly `request.count` completions in index order. Throws
  /// provider_error when the provider gives up.
  std::vector<completion> generate(const generation_request &request);

  /// Responses requested so far.
  std::size_t calls() const { return calls_.load(); }
  /// Requests that left the process.
  virtual std::size_t network_calls() const { return 0; }

protected:
  virtual std::string respond(const generation_request &request, std::size_t index) = 0;

private:
  std::atomic<std::size_t> calls_{0};
};

/// Completion i carries the enumerated candidates whose rank is congruent
/// to i modulo the number of completions. Repair requests get the whole
/// enumeration, reshuffled per round.
class offline_provider : public provider
{
public:
  explicit offline_provider(std::size_t budget = 200) : budget_(budget) {}
  std::string name() const override { return "offline"; }

protected:
  std::string respond(const generation_request &request, std::size_t index) override;

private:
  std::size_t budget_;
};

/// Serves fixed responses in call order; an exhausted script yields empty
/// responses.
class scripted_provider : public provider
{
public:
  explicit scripted_provider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string name() const override { return "scripted"; }

protected:
  std::string respond(const generation_request &request, std::size_t index) override;

private:
  std::mutex mutex_;
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

struct replay_record
{
  std::string benchmark;
  std::string prompt_hash;
  std::size_t index = 0;
  std::string response;
};

/// Re-serves a log of {benchmark, prompt_hash, index, response} JSON lines.
class replay_provider : public provider
{
public:
  explicit replay_provider(const std::string &log_path);
  explicit replay_provider(std::vector<replay_record> records);
  std::string name() const override { return "replay"; }

protected:
  std::string respond(const generation_request &request, std::size_t index) override;

private:
  std::map<std::tuple<std::string, std::string, std::size_t>, std::string> responses_;
};

/// Forwards to another provider and appends every exchange to a replay log.
class recording_provider : public provider
{
public:
  recording_provider(std::shared_ptr<provider> inner, const std::string &log_path);
  std::string name() const override { return inner_->name(); }
  std::size_t network_calls() const override { return inner_->network_calls(); }

protected:
  std::string respond(const generation_request &request, std::size_t index) override;

private:
  std::shared_ptr<provider> inner_;
  std::string path_;
  std::mutex mutex_;
};

struct http_endpoint
{
  std::string name = "openai";
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_s = 120;
  int max_attempts = 4;
  int backoff_ms = 1000;
};

/// Endpoint named in a JSON file {"endpoints": {"<name>": {...}}}, a
/// built-in name ("openai"), or a base URL.
http_endpoint resolve_endpoint(const std::string &name, const std::string &config_path = {});

/// OpenAI-compatible chat completions. Throws auth_error on construction
/// when the key variable is unset.
class http_provider : public provider
{
public:
  explicit http_provider(http_endpoint endpoint);
  std::string name() const override { return "http:" + endpoint_.name; }
  std::size_t network_calls() const override { return requests_.load(); }

protected:
  std::string respond(const generation_request &request, std::size_t index) override;

private:
  http_endpoint endpoint_;
  std::string key_;
  std::atomic<std::size_t> requests_{0};
};

/// "offline", "http:<name>", "replay:<log>".
std::shared_ptr<provider> make_provider(
  const std::string &spec, std::size_t offline_budget = 200, const std::string &endpoint_config = {});

/// Renders the template over the program text and asks for
/// config.completions completions.
std::vector<completion> generate(
  provider &prov, const prompt_template &t, const program &p, const generation_config &config,
  const std::string &benchmark = {});

} // namespace invsynth
