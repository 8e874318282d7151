#include <invsynth/errors.hpp>
#include <invsynth/log.hpp>
#include <invsynth/proposer.hpp>

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <thread>

namespace invsynth {

http_endpoint resolve_endpoint(const std::string &name, const std::string &config_path)
{
  http_endpoint ep;
  if(!config_path.empty())
  {
    std::ifstream in(config_path);
    if(!in)
      throw error("cannot read endpoint config " + config_path);
    nlohmann::json j;
    try
    {
      in >> j;
    }
    catch(const nlohmann::json::exception &e)
    {
      throw error("malformed endpoint config " + config_path + ": " + e.what());
    }
    if(j.contains("endpoints") && j["endpoints"].contains(name))
    {
      const auto &e = j["endpoints"][name];
      ep.name = name;
      ep.base_url = e.value("base_url", ep.base_url);
      ep.model = e.value("model", ep.model);
      ep.api_key_env = e.value("api_key_env", ep.api_key_env);
      ep.timeout_s = e.value("timeout_s", ep.timeout_s);
      ep.max_attempts = e.value("max_attempts", ep.max_attempts);
      ep.backoff_ms = e.value("backoff_ms", ep.backoff_ms);
      return ep;
    }
  }
  if(name == "openai")
    return ep;
  if(name.rfind("http://", 0) == 0 || name.rfind("https://", 0) == 0)
  {
    ep.name = name;
    ep.base_url = name;
    ep.api_key_env = "INVSYNTH_API_KEY";
    return ep;
  }
  throw error("unknown HTTP endpoint '" + name + "'");
}

http_provider::http_provider(http_endpoint endpoint) : endpoint_(std::move(endpoint))
{
  const char *key = std::getenv(endpoint_.api_key_env.c_str());
  if(key == nullptr || *key == '\0')
    throw auth_error("environment variable " + endpoint_.api_key_env + " is not set");
  key_ = key;
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if(endpoint_.base_url.rfind("https://", 0) == 0)
    throw provider_error("this build has no TLS support for " + endpoint_.base_url);
#endif
}

namespace {

/// "https://host:port/prefix" -> ("https://host:port", "/prefix")
std::pair<std::string, std::string> split_url(const std::string &url)
{
  auto scheme_end = url.find("://");
  auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if(path_start == std::string::npos)
    return {url, ""};
  std::string path = url.substr(path_start);
  while(!path.empty() && path.back() == '/')
    path.pop_back();
  return {url.substr(0, path_start), path};
}

bool transient(int status)
{
  return status == 408 || status == 409 || status == 429 || status >= 500;
}

} // namespace

std::string http_provider::respond(const generation_request &request, std::size_t)
{
  auto [host, prefix] = split_url(endpoint_.base_url);
  httplib::Client client(host);
  client.set_connection_timeout(endpoint_.timeout_s, 0);
  client.set_read_timeout(endpoint_.timeout_s, 0);
  client.set_write_timeout(endpoint_.timeout_s, 0);

  nlohmann::json body;
  body["model"] = request.config.model.empty() ? endpoint_.model : request.config.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.config.temperature;
  body["max_tokens"] = request.config.max_tokens;
  const std::string payload = body.dump();
  const httplib::Headers headers{{"Authorization", "Bearer " + key_}};

  std::string last_error;
  for(int attempt = 1; attempt <= endpoint_.max_attempts; ++attempt)
  {
    if(attempt > 1)
      std::this_thread::sleep_for(std::chrono::milliseconds(endpoint_.backoff_ms << (attempt - 2)));
    ++requests_;
    auto res = client.Post(prefix + "/chat/completions", headers, payload, "application/json");
    if(!res)
    {
      last_error = httplib::to_string(res.error());
      log_warning(name() + ": attempt " + std::to_string(attempt) + " failed: " + last_error);
      continue;
    }
    if(res->status == 401 || res->status == 403)
      throw auth_error(name() + ": request rejected with status " + std::to_string(res->status));
    if(transient(res->status))
    {
      last_error = "status " + std::to_string(res->status);
      log_warning(name() + ": attempt " + std::to_string(attempt) + " failed: " + last_error);
      continue;
    }
    if(res->status != 200)
      throw provider_error(name() + ": status " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
    try
    {
      auto j = nlohmann::json::parse(res->body);
      const auto &content = j.at("choices").at(0).at("message").at("content");
      return content.is_null() ? std::string() : content.get<std::string>();
    }
    catch(const nlohmann::json::exception &e)
    {
      throw provider_error(name() + ": unexpected response: " + e.what());
    }
  }
  throw provider_error(name() + ": giving up after " + std::to_string(endpoint_.max_attempts) + " attempts: " + last_error);
}

} // namespace invsynth
