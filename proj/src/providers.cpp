#include <invsynth/errors.hpp>
#include <invsynth/printer.hpp>
#include <invsynth/proposer.hpp>

#include <json.hpp>

#include <chrono>
#include <fstream>

namespace invsynth {

std::vector<completion> provider::generate(const generation_request &request)
{
  std::vector<completion> out;
  for(std::size_t i = 0; i < request.count; ++i)
  {
    const std::size_t index = request.first_index + i;
    ++calls_;
    auto start = std::chrono::steady_clock::now();
    completion c;
    c.index = index;
    c.raw = respond(request, index);
    c.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    c.extracted = extract_invariants(c.raw);
    c.provider = name();
    out.push_back(std::move(c));
  }
  return out;
}

// --- offline -----------------------------------------------------------------------

std::string offline_provider::respond(const generation_request &request, std::size_t index)
{
  if(request.prog == nullptr)
    throw provider_error("the offline provider needs the parsed program");
  const std::size_t shards = std::max<std::size_t>(1, request.config.completions);
  std::vector<std::string> lines;
  if(request.repair)
  {
    for(const auto &c : enumerate_candidates(*request.prog, request.config.seed + index, budget_))
      lines.push_back(c.source);
  }
  else
  {
    candidate_set all = enumerate_candidates(*request.prog, request.config.seed, budget_);
    for(std::size_t i = index % shards; i < all.size(); i += shards)
      lines.push_back(all[i].source);
  }
  return render_response(lines);
}

// --- scripted ------------------------------------------------------------------------

std::string scripted_provider::respond(const generation_request &, std::size_t)
{
  std::lock_guard<std::mutex> lock(mutex_);
  if(next_ >= responses_.size())
    return {};
  return responses_[next_++];
}

// --- replay ----------------------------------------------------------------------------

replay_provider::replay_provider(std::vector<replay_record> records)
{
  for(auto &r : records)
    responses_[{r.benchmark, r.prompt_hash, r.index}] = std::move(r.response);
}

replay_provider::replay_provider(const std::string &log_path)
{
  std::ifstream in(log_path);
  if(!in)
    throw provider_error("cannot read replay log " + log_path);
  std::string line;
  std::size_t number = 0;
  while(std::getline(in, line))
  {
    ++number;
    if(line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try
    {
      auto j = nlohmann::json::parse(line);
      responses_[{j.at("benchmark").get<std::string>(),
                  j.at("prompt_hash").get<std::string>(),
                  j.at("index").get<std::size_t>()}] = j.at("response").get<std::string>();
    }
    catch(const nlohmann::json::exception &e)
    {
      throw provider_error(log_path + ":" + std::to_string(number) + ": malformed record: " + e.what());
    }
  }
}

std::string replay_provider::respond(const generation_request &request, std::size_t index)
{
  auto it = responses_.find({request.benchmark, prompt_hash(request.prompt), index});
  if(it == responses_.end())
    throw provider_error(
      "replay log has no response for " + request.benchmark + " #" + std::to_string(index) +
      " (prompt " + prompt_hash(request.prompt) + ")");
  return it->second;
}

// --- recording ---------------------------------------------------------------------------

recording_provider::recording_provider(std::shared_ptr<provider> inner, const std::string &log_path)
  : inner_(std::move(inner)), path_(log_path)
{
  std::ofstream touch(path_, std::ios::app);
  if(!touch)
    throw provider_error("cannot write replay log " + path_);
}

std::string recording_provider::respond(const generation_request &request, std::size_t index)
{
  generation_request one = request;
  one.first_index = index;
  one.count = 1;
  auto started = std::chrono::system_clock::now();
  std::string response = inner_->generate(one).at(0).raw;
  auto finished = std::chrono::system_clock::now();

  nlohmann::json j;
  j["benchmark"] = request.benchmark;
  j["prompt_hash"] = prompt_hash(request.prompt);
  j["index"] = index;
  j["response"] = response;
  j["provider"] = inner_->name();
  j["prompt"] = request.prompt;
  auto ms = [](auto t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  };
  j["requested_at_ms"] = ms(started);
  j["answered_at_ms"] = ms(finished);

  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  out << j.dump() << '\n';
  if(!out)
    throw provider_error("cannot append to replay log " + path_);
  return response;
}

// --- factory ----------------------------------------------------------------------------

std::shared_ptr<provider> make_provider(
  const std::string &spec, std::size_t offline_budget, const std::string &endpoint_config)
{
  if(spec == "offline")
    return std::make_shared<offline_provider>(offline_budget);
  if(spec.rfind("replay:", 0) == 0)
    return std::make_shared<replay_provider>(spec.substr(7));
  if(spec.rfind("http:", 0) == 0)
    return std::make_shared<http_provider>(resolve_endpoint(spec.substr(5), endpoint_config));
  throw error("unknown provider '" + spec + "' (expected offline, http:<name> or replay:<log>)");
}

std::vector<completion> generate(
  provider &prov, const prompt_template &t, const program &p, const generation_config &config,
  const std::string &benchmark)
{
  generation_request request;
  request.benchmark = benchmark.empty() ? p.name : benchmark;
  request.prompt = render_prompt(t, p.source_text.empty() ? pretty_print(p) : p.source_text);
  request.prog = &p;
  request.count = config.completions;
  request.config = config;
  return prov.generate(request);
}

} // namespace invsynth
