#include <invsynth/parser.hpp>
#include <invsynth/proposer.hpp>

#include <cctype>
#include <sstream>

namespace invsynth {

namespace {

std::string trim(std::string_view s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if(b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Contents of the last complete ``` fence.
std::optional<std::string> last_code_block(const std::string &text)
{
  std::optional<std::string> last;
  std::optional<std::string> open;
  std::istringstream in(text);
  std::string line;
  while(std::getline(in, line))
  {
    std::string t = trim(line);
    if(t.rfind("```", 0) == 0)
    {
      if(open)
      {
        last = std::move(*open);
        open.reset();
      }
      else
        open.emplace();
      continue;
    }
    if(open)
      *open += line + "\n";
  }
  return last;
}

/// Drops ACSL line decorations: leading "//@" or "@" characters.
std::string strip_decorations(const std::string &block)
{
  std::istringstream in(block);
  std::string line, out;
  while(std::getline(in, line))
  {
    std::size_t i = line.find_first_not_of(" \t");
    if(i != std::string::npos && line.compare(i, 3, "//@") == 0)
      i += 3;
    while(i != std::string::npos && i < line.size() && line[i] == '@')
      ++i;
    out += (i == std::string::npos ? std::string() : line.substr(i)) + "\n";
  }
  return out;
}

bool word_at(const std::string &s, std::size_t i, std::string_view w)
{
  if(s.compare(i, w.size(), w) != 0)
    return false;
  auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  if(i > 0 && (ident(s[i - 1]) || s[i - 1] == '\\'))
    return false;
  return i + w.size() >= s.size() || !ident(s[i + w.size()]);
}

/// Position right after "loop <ws> invariant" starting at i, or npos.
std::size_t clause_start(const std::string &s, std::size_t i, std::string_view kind)
{
  if(!word_at(s, i, "loop"))
    return std::string::npos;
  std::size_t j = i + 4;
  if(j >= s.size() || !std::isspace(static_cast<unsigned char>(s[j])))
    return std::string::npos;
  while(j < s.size() && std::isspace(static_cast<unsigned char>(s[j])))
    ++j;
  if(kind.empty())
    return j;
  return word_at(s, j, kind) ? j + kind.size() : std::string::npos;
}

std::vector<std::string> invariant_clauses(const std::string &block)
{
  std::vector<std::string> out;
  std::size_t i = 0;
  while(i < block.size())
  {
    std::size_t start = clause_start(block, i, "invariant");
    if(start == std::string::npos)
    {
      ++i;
      continue;
    }
    // the clause runs to its ';', the next clause, or the end of the block;
    // the ';' after a quantifier binder is part of the expression
    bool binder = false;
    std::size_t j = start;
    for(; j < block.size(); ++j)
    {
      if(block[j] == '\\' && (word_at(block, j + 1, "forall") || word_at(block, j + 1, "exists")))
        binder = true;
      if(block[j] == ';')
      {
        if(binder)
        {
          binder = false;
          continue;
        }
        break;
      }
      if(clause_start(block, j, {}) != std::string::npos || block.compare(j, 2, "*/") == 0)
        break;
    }
    std::string text = trim(std::string_view(block).substr(start, j - start));
    if(!text.empty())
      out.push_back(std::move(text));
    i = j < block.size() && block[j] == ';' ? j + 1 : j;
  }
  return out;
}

/// Splits at '&&' outside parentheses.
std::vector<std::string> split_top_level_and(const std::string &text)
{
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t from = 0;
  for(std::size_t i = 0; i < text.size(); ++i)
  {
    char c = text[i];
    if(c == '(' || c == '[' || c == '{')
      ++depth;
    else if(c == ')' || c == ']' || c == '}')
      --depth;
    else if(depth == 0 && c == '&' && i + 1 < text.size() && text[i + 1] == '&')
    {
      parts.push_back(trim(std::string_view(text).substr(from, i - from)));
      from = i + 2;
      ++i;
    }
  }
  parts.push_back(trim(std::string_view(text).substr(from)));
  return parts;
}

/// The conjunct texts of one clause: verbatim pieces where the textual split
/// agrees with the parse, printed conjuncts otherwise.
std::vector<std::string> conjunct_texts(const std::string &clause)
{
  candidate whole = parse_invariant(clause);
  if(!whole.parsed || whole.parsed->kind() != expr_kind::and_)
    return {clause};
  const std::vector<expr> expected = conjuncts(*whole.parsed);

  std::vector<std::string> texts;
  std::vector<expr> got;
  for(const auto &piece : split_top_level_and(clause))
  {
    candidate c = parse_invariant(piece);
    if(!c.parsed)
    {
      got.clear();
      break;
    }
    auto parts = conjuncts(*c.parsed);
    if(parts.size() == 1)
      texts.push_back(piece);
    else
      for(const auto &p : parts)
        texts.push_back(to_string(p));
    got.insert(got.end(), parts.begin(), parts.end());
  }
  if(got == expected)
    return texts;
  texts.clear();
  for(const auto &e : expected)
    texts.push_back(to_string(e));
  return texts;
}

} // namespace

candidate_set extract_invariants(const std::string &response)
{
  candidate_set out;
  try
  {
    auto block = last_code_block(response);
    if(!block)
      return out;
    std::size_t id = 0;
    for(const auto &clause : invariant_clauses(strip_decorations(*block)))
      for(const auto &text : conjunct_texts(clause))
        if(out.insert(parse_invariant(text, id)))
          ++id;
  }
  catch(const std::exception &)
  {
    // malformed input degrades to whatever was collected
  }
  return out;
}

std::string render_response(const std::vector<std::string> &invariants)
{
  std::string out = "```\n/*@\n";
  for(const auto &i : invariants)
    out += "    loop invariant " + i + ";\n";
  out += "*/\n```\n";
  return out;
}

} // namespace invsynth
