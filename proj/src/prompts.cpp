#include <invsynth/errors.hpp>
#include <invsynth/log.hpp>
#include <invsynth/proposer.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace invsynth {

// generated from prompts/*.txt
const char *builtin_prompt_text(const std::string &name);

namespace {

constexpr std::string_view code_placeholder = "{{ code }}";
constexpr std::string_view error_placeholder = "{{ error }}";


prompt_template checked(prompt_template t)
{
  if(t.body.find(code_placeholder) == std::string::npos)
    throw error("prompt template '" + t.name + "' has no {{ code }} placeholder");
  return t;
}

} // namespace

bool prompt_template::needs_error() const
{
  return body.find(error_placeholder) != std::string::npos;
}

prompt_template builtin_template(const std::string &name)
{
  const char *text = builtin_prompt_text(name);
  if(text == nullptr)
    throw error("no built-in prompt named '" + name + "'");
  return checked({name, text});
}

prompt_template load_template(const std::string &name_or_path)
{
  if(builtin_prompt_text(name_or_path) != nullptr)
    return builtin_template(name_or_path);
  std::ifstream in(name_or_path, std::ios::binary);
  if(!in)
    throw error("cannot read prompt template " + name_or_path);
  std::ostringstream body;
  body << in.rdbuf();
  return checked({name_or_path, body.str()});
}

std::string render_prompt(const prompt_template &t, const std::string &code, const std::optional<std::string> &error)
{
  if(t.needs_error() && !error)
    throw missing_placeholder_value("prompt template '" + t.name + "' needs an error text");
  if(!t.needs_error() && error)
    log_warning("prompt template '" + t.name + "' has no {{ error }} placeholder; error text dropped");

  // substitute both placeholders in one pass so inserted text is never
  // scanned for placeholders
  std::string out;
  std::size_t pos = 0;
  while(pos < t.body.size())
  {
    std::size_t c = t.body.find(code_placeholder, pos);
    std::size_t e = t.needs_error() ? t.body.find(error_placeholder, pos) : std::string::npos;
    std::size_t next = std::min(c, e);
    if(next == std::string::npos)
    {
      out.append(t.body, pos, std::string::npos);
      break;
    }
    out.append(t.body, pos, next - pos);
    if(next == c)
    {
      out += code;
      pos = next + code_placeholder.size();
    }
    else
    {
      out += *error;
      pos = next + error_placeholder.size();
    }
  }
  return out;
}

std::string prompt_hash(const std::string &prompt)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for(unsigned char c : prompt)
  {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace invsynth
