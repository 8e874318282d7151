#include <invsynth/harness.hpp>

#include <invsynth/errors.hpp>
#include <invsynth/log.hpp>
#include <invsynth/parser.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace invsynth {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<std::string> split_lines(const std::string &text)
{
  std::vector<std::string> lines;
  std::string cur;
  for(char c : text)
  {
    if(c == '\n')
    {
      lines.push_back(std::move(cur));
      cur.clear();
    }
    else
      cur += c;
  }
  lines.push_back(std::move(cur));
  return lines;
}

std::string rtrim(std::string s)
{
  while(!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

bool blank(const std::string &s)
{
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Index just past a string or character literal starting at i.
std::size_t skip_literal(const std::string &s, std::size_t i)
{
  const char q = s[i++];
  while(i < s.size() && s[i] != q && s[i] != '\n')
  {
    if(s[i] == '\\')
      ++i;
    ++i;
  }
  return std::min(s.size(), i + 1);
}

// Index just past an annotation (//@ to end of line, /*@ to */), or i.
std::size_t skip_annotation(const std::string &s, std::size_t i)
{
  if(s.compare(i, 3, "//@") == 0)
  {
    const auto e = s.find('\n', i);
    return e == std::string::npos ? s.size() : e;
  }
  if(s.compare(i, 3, "/*@") == 0)
  {
    const auto e = s.find("*/", i + 3);
    return e == std::string::npos ? s.size() : e + 2;
  }
  return i;
}

bool verifier_intrinsic(const std::string &name)
{
  return name.rfind("__VERIFIER_", 0) == 0 || name == "reach_error" || name == "assume_abort_if_not" ||
         name == "abort" || name == "exit" || name == "__assert_fail" || name == "assume" || name == "assert";
}

std::string nondet_replacement(const std::string &suffix)
{
  static const std::set<std::string> unsigned_types = {
    "uint", "uchar", "ushort", "ulong", "ulonglong", "unsigned", "size_t", "u32", "u8", "u16", "u64"};
  if(unsigned_types.count(suffix))
    return "unknown_uint";
  if(suffix == "float" || suffix == "double")
    return "unknown_float";
  if(suffix == "bool" || suffix == "_Bool")
    return "unknown_bool";
  return "unknown_int";
}

// Position just past the statement starting at i (after whitespace): a
// brace block or everything up to the next top-level ';'.
std::size_t skip_statement(const std::string &s, std::size_t i)
{
  while(i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
    ++i;
  int braces = 0, parens = 0;
  const bool block = i < s.size() && s[i] == '{';
  while(i < s.size())
  {
    const char c = s[i];
    if(c == '"' || c == '\'')
    {
      i = skip_literal(s, i);
      continue;
    }
    if(const auto a = skip_annotation(s, i); a != i)
    {
      i = a;
      continue;
    }
    if(c == '{')
      ++braces;
    else if(c == '}')
    {
      --braces;
      if(block && braces == 0)
        return i + 1;
    }
    else if(c == '(')
      ++parens;
    else if(c == ')')
      --parens;
    else if(c == ';' && !block && parens == 0 && braces == 0)
      return i + 1;
    ++i;
  }
  return s.size();
}

// Index of the ')' matching the '(' at i, or npos.
std::size_t matching_paren(const std::string &s, std::size_t i)
{
  int depth = 0;
  for(; i < s.size(); ++i)
  {
    if(s[i] == '"' || s[i] == '\'')
    {
      i = skip_literal(s, i) - 1;
      continue;
    }
    if(s[i] == '(')
      ++depth;
    else if(s[i] == ')' && --depth == 0)
      return i;
  }
  return std::string::npos;
}

std::size_t skip_space(const std::string &s, std::size_t i)
{
  while(i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
    ++i;
  return i;
}

// Drops file-scope declarations and definitions of the verifier intrinsics.
std::string remove_intrinsic_definitions(const std::string &s)
{
  std::string out;
  std::size_t stmt_start = 0; // in s, start of the current file-scope item
  std::size_t copied = 0;
  int depth = 0;
  for(std::size_t i = 0; i < s.size();)
  {
    const char c = s[i];
    if(c == '"' || c == '\'')
    {
      i = skip_literal(s, i);
      continue;
    }
    if(const auto a = skip_annotation(s, i); a != i)
    {
      i = a;
      if(depth == 0)
        stmt_start = i;
      continue;
    }
    if(c == '{')
      ++depth;
    else if(c == '}')
    {
      if(--depth == 0)
        stmt_start = i + 1;
    }
    else if(c == ';' && depth == 0)
      stmt_start = i + 1;
    else if(depth == 0 && ident_start(c) && (i == 0 || !ident_char(s[i - 1])))
    {
      std::size_t e = i;
      while(e < s.size() && ident_char(s[e]))
        ++e;
      const std::string name = s.substr(i, e - i);
      const std::size_t open = skip_space(s, e);
      // a declaration: only type words and '*' between item start and name
      const std::string lead = s.substr(stmt_start, i - stmt_start);
      const bool declarator = lead.find_first_not_of(" \t\n*") != std::string::npos &&
                              std::all_of(lead.begin(), lead.end(), [](char ch) {
                                return ident_char(ch) || std::isspace(static_cast<unsigned char>(ch)) || ch == '*';
                              });
      if(declarator && verifier_intrinsic(name) && open < s.size() && s[open] == '(')
      {
        const std::size_t close = matching_paren(s, open);
        if(close != std::string::npos)
        {
          // declaration ends at ';' (after optional attributes) or a body
          std::size_t j = close + 1;
          int parens = 0;
          while(j < s.size() && !(parens == 0 && (s[j] == ';' || s[j] == '{')))
          {
            if(s[j] == '(')
              ++parens;
            else if(s[j] == ')')
              --parens;
            ++j;
          }
          std::size_t end = j < s.size() && s[j] == '{' ? skip_statement(s, j) : std::min(s.size(), j + 1);
          out += s.substr(copied, stmt_start - copied);
          // swallow the rest of the line when it is empty
          std::size_t k = end;
          while(k < s.size() && (s[k] == ' ' || s[k] == '\t'))
            ++k;
          if(k < s.size() && s[k] == '\n')
            end = k + 1;
          copied = end;
          stmt_start = end;
          i = end;
          continue;
        }
      }
      i = e;
      continue;
    }
    ++i;
  }
  out += s.substr(copied);
  return out;
}

class rewriter
{
public:
  explicit rewriter(const std::string &s) : s_(s) {}

  std::string run()
  {
    while(i_ < s_.size())
    {
      const char c = s_[i_];
      if(c == '\n')
      {
        need_break_ = false;
        out_ += c;
        ++i_;
        continue;
      }
      if(need_break_ && !std::isspace(static_cast<unsigned char>(c)))
      {
        out_ = rtrim(out_);
        out_ += '\n';
        need_break_ = false;
      }
      if(c == '"' || c == '\'')
      {
        copy_to(skip_literal(s_, i_));
        continue;
      }
      if(const auto a = skip_annotation(s_, i_); a != i_)
      {
        copy_to(a);
        continue;
      }
      if(ident_start(c) && (i_ == 0 || !ident_char(s_[i_ - 1])))
      {
        identifier();
        continue;
      }
      out_ += c;
      ++i_;
    }
    return out_;
  }

private:
  void copy_to(std::size_t e)
  {
    out_ += s_.substr(i_, e - i_);
    i_ = e;
  }

  bool at_statement_position() const
  {
    const std::string t = rtrim(out_);
    if(t.empty())
      return true;
    const char last = t.back();
    if(last == ';' || last == '{' || last == '}' || last == ':')
      return true;
    return false;
  }

  void emit_assert(const std::string &cond)
  {
    const std::string text = "//@ assert " + cond + ";";
    if(at_statement_position())
      out_ += text;
    else
    {
      out_ += "{\n" + text + "\n}";
    }
    need_break_ = true;
  }

  void identifier()
  {
    std::size_t e = i_;
    while(e < s_.size() && ident_char(s_[e]))
      ++e;
    const std::string name = s_.substr(i_, e - i_);
    const std::size_t after = skip_space(s_, e);

    if(name == "ERROR" && after < s_.size() && s_[after] == ':' && s_.compare(after, 2, "::") != 0)
    {
      i_ = skip_statement(s_, after + 1);
      emit_assert("(\\false)");
      return;
    }
    if(name == "goto")
    {
      std::size_t l = after, le = after;
      while(le < s_.size() && ident_char(s_[le]))
        ++le;
      const std::size_t semi = skip_space(s_, le);
      if(s_.compare(l, le - l, "ERROR") == 0 && le - l == 5 && semi < s_.size() && s_[semi] == ';')
      {
        i_ = semi + 1;
        emit_assert("(\\false)");
        return;
      }
    }
    const bool call = after < s_.size() && s_[after] == '(';
    if(call && (name == "reach_error" || name == "__VERIFIER_error"))
    {
      const std::size_t close = matching_paren(s_, after);
      const std::size_t semi = close == std::string::npos ? close : skip_space(s_, close + 1);
      if(semi != std::string::npos && semi < s_.size() && s_[semi] == ';')
      {
        i_ = semi + 1;
        emit_assert("(\\false)");
        return;
      }
    }
    if(call && name == "__VERIFIER_assert")
    {
      const std::size_t close = matching_paren(s_, after);
      const std::size_t semi = close == std::string::npos ? close : skip_space(s_, close + 1);
      if(semi != std::string::npos && semi < s_.size() && s_[semi] == ';')
      {
        std::string arg = s_.substr(after + 1, close - after - 1);
        for(char &ch : arg)
          if(ch == '\n' || ch == '\t')
            ch = ' ';
        i_ = semi + 1;
        emit_assert("(" + trim_copy(arg) + ")");
        return;
      }
    }
    if(call && (name == "__VERIFIER_assume" || name == "assume_abort_if_not"))
    {
      out_ += "assume";
      i_ = e;
      return;
    }
    if(call && name.rfind("__VERIFIER_nondet_", 0) == 0)
    {
      out_ += nondet_replacement(name.substr(18));
      i_ = e;
      return;
    }
    out_ += name;
    i_ = e;
  }

  static std::string trim_copy(const std::string &s)
  {
    std::size_t b = 0, e = s.size();
    while(b < e && std::isspace(static_cast<unsigned char>(s[b])))
      ++b;
    while(e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
      --e;
    return s.substr(b, e - b);
  }

  const std::string &s_;
  std::size_t i_ = 0;
  std::string out_;
  bool need_break_ = false;
};

// Adds `return 0;` to an int main whose body does not end in a return.
std::string add_default_return(const std::string &s)
{
  for(std::size_t i = 0; i < s.size(); ++i)
  {
    if(s.compare(i, 4, "main") != 0 || (i > 0 && ident_char(s[i - 1])) ||
       (i + 4 < s.size() && ident_char(s[i + 4])))
      continue;
    const std::size_t open = skip_space(s, i + 4);
    if(open >= s.size() || s[open] != '(')
      continue;
    // return type: the word before main, if any
    std::size_t b = i;
    while(b > 0 && std::isspace(static_cast<unsigned char>(s[b - 1])))
      --b;
    std::size_t w = b;
    while(w > 0 && ident_char(s[w - 1]))
      --w;
    const std::string type = s.substr(w, b - w);
    if(type == "void")
      return s;
    const std::size_t close = matching_paren(s, open);
    if(close == std::string::npos)
      return s;
    const std::size_t body = skip_space(s, close + 1);
    if(body >= s.size() || s[body] != '{')
      continue;
    const std::size_t end = skip_statement(s, body) - 1; // the closing brace
    std::size_t last = end;
    while(last > body + 1 && std::isspace(static_cast<unsigned char>(s[last - 1])))
      --last;
    // start of the final statement
    bool has_return = false;
    if(last > body + 1 && s[last - 1] == ';')
    {
      std::size_t st = last - 1;
      while(st > body + 1 && s[st - 1] != ';' && s[st - 1] != '{' && s[st - 1] != '}')
        --st;
      std::string stmt = s.substr(st, last - st);
      const auto first = stmt.find_first_not_of(" \t\n\r");
      if(first != std::string::npos)
      {
        stmt = stmt.substr(first);
        has_return = stmt.rfind("return", 0) == 0 && (stmt.size() == 6 || !ident_char(stmt[6]));
      }
    }
    if(has_return)
      return s;
    std::string indent = "  ";
    return s.substr(0, last) + "\n" + indent + "return 0;" + s.substr(last);
  }
  return s;
}

} // namespace

std::string strip_comments(const std::string &s)
{
  std::string out;
  out.reserve(s.size());
  for(std::size_t i = 0; i < s.size();)
  {
    const char c = s[i];
    if(c == '"' || c == '\'')
    {
      const auto e = skip_literal(s, i);
      out += s.substr(i, e - i);
      i = e;
      continue;
    }
    if(const auto a = skip_annotation(s, i); a != i)
    {
      out += s.substr(i, a - i);
      i = a;
      continue;
    }
    if(s.compare(i, 2, "//") == 0)
    {
      while(i < s.size() && s[i] != '\n')
        ++i;
      continue;
    }
    if(s.compare(i, 2, "/*") == 0)
    {
      const auto e = s.find("*/", i + 2);
      const std::size_t stop = e == std::string::npos ? s.size() : e + 2;
      // keep line structure; a comment between tokens still separates them
      bool newline = false;
      for(std::size_t k = i; k < stop; ++k)
        if(s[k] == '\n')
        {
          out += '\n';
          newline = true;
        }
      if(!newline && !out.empty() && stop < s.size() && ident_char(out.back()) && ident_char(s[stop]))
        out += ' ';
      i = stop;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

std::string normalize(const std::string &source)
{
  const bool final_newline = !source.empty() && source.back() == '\n';

  // preprocessor output and directives
  std::string text;
  {
    const auto lines = split_lines(source);
    for(std::size_t k = 0; k < lines.size(); ++k)
    {
      const auto first = lines[k].find_first_not_of(" \t");
      if(first != std::string::npos && lines[k][first] == '#')
        continue;
      text += lines[k];
      if(k + 1 < lines.size())
        text += '\n';
    }
  }

  // comments; lines that held nothing else go away
  {
    const auto before = split_lines(text);
    const auto after = split_lines(strip_comments(text));
    std::string kept;
    for(std::size_t k = 0; k < after.size(); ++k)
    {
      const bool was_blank = k < before.size() && blank(before[k]);
      if(blank(after[k]) && !was_blank)
        continue;
      kept += rtrim(after[k]);
      kept += '\n';
    }
    text = kept;
  }

  text = remove_intrinsic_definitions(text);
  text = rewriter(text).run();
  text = add_default_return(text);

  // tidy: trailing blanks, runs of empty lines, leading/trailing empty lines
  std::string out;
  {
    const auto lines = split_lines(text);
    bool prev_blank = true;
    for(const auto &l : lines)
    {
      const std::string t = rtrim(l);
      if(t.empty())
      {
        if(prev_blank)
          continue;
        prev_blank = true;
      }
      else
        prev_blank = false;
      out += t;
      out += '\n';
    }
    while(!out.empty() && out.back() == '\n')
      out.pop_back();
    if(final_newline && !out.empty())
      out += '\n';
  }
  return out;
}

// --- categorization ------------------------------------------------------------

namespace {

struct token
{
  std::string text;
};

std::vector<token> lex(const std::string &stripped)
{
  std::vector<token> toks;
  const std::string &s = stripped;
  bool line_start = true;
  for(std::size_t i = 0; i < s.size();)
  {
    const char c = s[i];
    if(c == '\n')
    {
      line_start = true;
      ++i;
      continue;
    }
    if(std::isspace(static_cast<unsigned char>(c)))
    {
      ++i;
      continue;
    }
    if(line_start && c == '#')
    {
      while(i < s.size() && s[i] != '\n')
        ++i;
      continue;
    }
    line_start = false;
    if(const auto a = skip_annotation(s, i); a != i)
    {
      i = a;
      continue;
    }
    if(c == '"' || c == '\'')
    {
      const auto e = skip_literal(s, i);
      toks.push_back({s.substr(i, e - i)});
      i = e;
      continue;
    }
    if(ident_char(c))
    {
      std::size_t e = i;
      while(e < s.size() && ident_char(s[e]))
        ++e;
      toks.push_back({s.substr(i, e - i)});
      i = e;
      continue;
    }
    if(s.compare(i, 2, "->") == 0)
    {
      toks.push_back({"->"});
      i += 2;
      continue;
    }
    toks.push_back({std::string(1, c)});
    ++i;
  }
  return toks;
}

bool type_word(const std::string &t)
{
  static const std::set<std::string> words = {
    "int", "char", "short", "long", "unsigned", "signed", "void", "float", "double", "const", "_Bool", "size_t"};
  return words.count(t) > 0;
}

} // namespace

category categorize(const std::string &source)
{
  category cat;
  cat.lines = split_lines(source).size();
  if(!source.empty() && source.back() == '\n')
    --cat.lines;

  const auto toks = lex(remove_intrinsic_definitions(strip_comments(source)));
  int depth = 0;
  // inside the body of a skipped (intrinsic) definition: the depth at which it ends
  int skip_until = -1;
  std::vector<bool> do_block; // per open brace: opened right after `do`
  bool prev_closed_do = false;

  for(std::size_t k = 0; k < toks.size(); ++k)
  {
    const std::string &t = toks[k].text;
    const bool closed_do = prev_closed_do;
    prev_closed_do = false;

    if(t == "{")
    {
      do_block.push_back(k > 0 && toks[k - 1].text == "do");
      ++depth;
      continue;
    }
    if(t == "}")
    {
      if(!do_block.empty())
      {
        prev_closed_do = do_block.back();
        do_block.pop_back();
      }
      --depth;
      if(skip_until >= 0 && depth == skip_until)
        skip_until = -1;
      continue;
    }
    if(skip_until >= 0)
      continue;

    if(depth == 0 && k + 1 < toks.size() && toks[k + 1].text == "(" && ident_start(t[0]))
    {
      // function definition: name ( ... ) {
      std::size_t j = k + 1;
      int parens = 0;
      for(; j < toks.size(); ++j)
      {
        if(toks[j].text == "(")
          ++parens;
        else if(toks[j].text == ")" && --parens == 0)
          break;
      }
      if(j + 1 < toks.size() && toks[j + 1].text == "{")
      {
        if(verifier_intrinsic(t))
          skip_until = 0;
        else
          ++cat.methods;
      }
      continue;
    }
    if(t == "for" || t == "do")
      ++cat.loops;
    else if(t == "while")
    {
      if(!closed_do)
        ++cat.loops;
    }
    else if(t == "[")
      cat.arrays = true;
    else if(t == "->")
      cat.pointers = true;
    else if(t == "*" && k > 0 && (type_word(toks[k - 1].text) || toks[k - 1].text == "*"))
      cat.pointers = true;
    else if(t == "*" && k > 1 && toks[k - 2].text == "struct")
      cat.pointers = true;
  }

  std::vector<std::string> reasons;
  if(cat.lines > 500)
    reasons.push_back("size");
  if(cat.loops != 1)
    reasons.push_back("loops=" + std::to_string(cat.loops));
  if(cat.methods != 1)
    reasons.push_back("methods=" + std::to_string(cat.methods));
  if(cat.arrays)
    reasons.push_back("arrays");
  if(cat.pointers)
    reasons.push_back("pointers");
  cat.included = reasons.empty();
  for(std::size_t k = 0; k < reasons.size(); ++k)
    cat.reason += (k ? "; " : "") + reasons[k];
  return cat;
}

const char *to_string(expectation e)
{
  switch(e)
  {
  case expectation::positive:
    return "positive";
  case expectation::negative:
    return "negative";
  case expectation::unknown:
    break;
  }
  return "unknown";
}

namespace {

expectation parse_expectation(const std::string &s)
{
  if(s == "positive" || s == "true" || s == "safe")
    return expectation::positive;
  if(s == "negative" || s == "false" || s == "unsafe")
    return expectation::negative;
  return expectation::unknown;
}

std::string read_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if(!in)
    throw error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if(!out)
    throw error("cannot write " + path.string());
  out << text;
}

} // namespace

std::map<std::string, expectation> read_manifest(const std::filesystem::path &corpus)
{
  std::map<std::string, expectation> out;
  const auto path = corpus / "manifest.json";
  if(!std::filesystem::exists(path))
    return out;
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(read_file(path));
  }
  catch(const nlohmann::json::exception &e)
  {
    throw error("malformed manifest " + path.string() + ": " + e.what());
  }
  const nlohmann::json &entries = j.contains("benchmarks") ? j["benchmarks"] : j;
  if(!entries.is_object())
    throw error("malformed manifest " + path.string());
  for(const auto &[file, v] : entries.items())
  {
    if(v.is_string())
      out[file] = parse_expectation(v.get<std::string>());
    else if(v.is_object() && v.contains("expected") && v["expected"].is_string())
      out[file] = parse_expectation(v["expected"].get<std::string>());
  }
  return out;
}

std::vector<benchmark_entry> load_corpus(const std::filesystem::path &corpus)
{
  if(!std::filesystem::is_directory(corpus))
    throw error("not a directory: " + corpus.string());
  const auto manifest = read_manifest(corpus);
  std::vector<std::filesystem::path> files;
  for(const auto &f : std::filesystem::directory_iterator(corpus))
    if(f.is_regular_file() && f.path().extension() == ".c")
      files.push_back(f.path());
  std::sort(files.begin(), files.end());

  std::vector<benchmark_entry> out;
  for(const auto &f : files)
  {
    benchmark_entry b;
    b.id = f.stem().string();
    b.path = f;
    const std::string raw = read_file(f);
    b.normalized = normalize(raw);
    b.features = categorize(raw);
    if(auto it = manifest.find(f.filename().string()); it != manifest.end())
      b.expected = it->second;
    if(!b.features.included)
      b.unsupported_reason = b.features.reason;
    else
    {
      try
      {
        parse_program(b.normalized);
        b.supported = true;
      }
      catch(const error &e)
      {
        b.unsupported_reason = std::string("parse: ") + e.what();
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

// --- metrics ----------------------------------------------------------------------

double pass_at_k(std::size_t n, std::size_t c, std::size_t k)
{
  if(c > n || k == 0 || k > n)
    throw std::domain_error(
      "pass@k needs 0 <= c <= n and 1 <= k <= n (n=" + std::to_string(n) + ", c=" + std::to_string(c) +
      ", k=" + std::to_string(k) + ")");
  if(n - c < k)
    return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=0}^{k-1} (n-c-i) / (n-i)
  double miss = 1.0;
  for(std::size_t i = 0; i < k; ++i)
    miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  return 1.0 - miss;
}

double union_houdini_rate(
  oracle &o, const program &p, const session_record &s, std::size_t k, std::size_t trials, std::uint64_t seed)
{
  const std::size_t n = s.completions.size();
  if(trials == 0)
    throw std::domain_error("union_houdini_rate needs at least one trial");
  if(k == 0 || k > n)
    throw std::domain_error(
      "union_houdini_rate needs 1 <= k <= " + std::to_string(n) + " (k=" + std::to_string(k) + ")");

  std::mt19937_64 rng(seed);
  std::map<std::vector<std::size_t>, bool> memo;
  std::vector<std::size_t> idx(n);
  std::size_t solved = 0;
  for(std::size_t t = 0; t < trials; ++t)
  {
    for(std::size_t i = 0; i < n; ++i)
      idx[i] = i;
    // partial Fisher-Yates: the first k slots form a uniform k-subset
    for(std::size_t i = 0; i < k; ++i)
    {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<std::size_t> subset(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(subset.begin(), subset.end());
    auto it = memo.find(subset);
    if(it == memo.end())
    {
      candidate_set u;
      for(std::size_t i : subset)
        u.insert_all(s.completions[i].candidates);
      bool ok = false;
      if(!u.empty())
        ok = houdini(o, p, u).success;
      it = memo.emplace(subset, ok).first;
    }
    solved += it->second ? 1 : 0;
  }
  return static_cast<double>(solved) / static_cast<double>(trials);
}

// --- campaigns ----------------------------------------------------------------

campaign_summary aggregate(const std::vector<benchmark_result> &results)
{
  campaign_summary sum;
  sum.benchmarks = results.size();
  std::size_t max_n = 0;
  for(const auto &r : results)
  {
    if(!r.session)
      continue;
    const auto &s = *r.session;
    ++sum.attempted;
    max_n = std::max(max_n, s.completions.size());
    if(s.first_success)
    {
      ++sum.solved_no_houdini;
      sum.ids_no_houdini.push_back(s.benchmark);
    }
    if(s.first_success || s.how == solved_by::houdini)
    {
      ++sum.solved_houdini;
      sum.ids_houdini.push_back(s.benchmark);
    }
    if(s.success)
    {
      ++sum.solved_repair;
      sum.ids_repair.push_back(s.benchmark);
    }
  }

  // pass@k over sessions where every completion was checked (eager runs)
  for(std::size_t k = 1; k <= max_n; ++k)
  {
    pass_at_k_point pt;
    pt.k = k;
    for(const auto &r : results)
    {
      if(!r.session)
        continue;
      const auto &s = *r.session;
      const std::size_t n = s.completions.size();
      if(n < k || n != s.n_samples)
        continue;
      std::size_t c = 0;
      bool complete = true;
      for(const auto &cr : s.completions)
      {
        c += cr.success ? 1 : 0;
        complete = complete && (cr.checked || cr.candidates.empty() || !cr.provider_error.empty());
      }
      if(!complete)
        continue;
      pt.expected_solved += pass_at_k(n, c, k);
    }
    sum.pass_at_k.push_back(pt);
  }

  for(const auto &r : results)
  {
    for(std::size_t k = 0; k < r.union_rates.size(); ++k)
    {
      if(sum.union_houdini_solved.size() <= k)
        sum.union_houdini_solved.resize(k + 1, 0.0);
      sum.union_houdini_solved[k] += r.union_rates[k];
    }
  }
  return sum;
}

namespace {

std::string csv_field(const std::string &s)
{
  if(s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for(char c : s)
  {
    if(c == '"')
      out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits = 6)
{
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

} // namespace

std::string report_csv(const campaign_report &report)
{
  std::ostringstream out;
  out << "# invsynth report v1\n";
  out << "benchmark,status,reason,expected,loops,methods,lines,provider,prompt,n_samples,n_repair,"
         "completions_verified,solved_no_houdini,solved_houdini,solved_repair,solved_by,oracle_calls,"
         "provider_calls,invariants\n";
  for(const auto &r : report.results)
  {
    const auto &e = r.entry;
    std::string status = "excluded";
    std::string reason = e.unsupported_reason;
    if(r.session)
      status = r.session->error.empty() ? "ran" : "error";
    else if(e.supported && e.expected == expectation::negative)
      reason = "expected negative";
    if(r.session && !r.session->error.empty())
      reason = r.session->error;
    out << csv_field(e.id) << ',' << status << ',' << csv_field(reason) << ',' << to_string(e.expected) << ','
        << e.features.loops << ',' << e.features.methods << ',' << e.features.lines << ',';
    if(!r.session)
    {
      out << ",,,,,,,,,,,\n";
      continue;
    }
    const auto &s = *r.session;
    std::size_t verified = 0;
    for(const auto &c : s.completions)
      verified += c.success ? 1 : 0;
    const bool no_h = s.first_success.has_value();
    const bool h = no_h || s.how == solved_by::houdini;
    std::string invs;
    for(std::size_t i = 0; i < s.invariants.size(); ++i)
      invs += (i ? "; " : "") + s.invariants[i].source;
    out << csv_field(s.provider) << ',' << csv_field(s.prompt) << ',' << s.n_samples << ',' << s.n_repair << ','
        << verified << ',' << no_h << ',' << h << ',' << s.success << ',' << to_string(s.how) << ','
        << s.oracle_calls << ',' << s.provider_calls << ',' << csv_field(invs) << '\n';
  }
  return out.str();
}

void write_report(const campaign_report &report, const std::filesystem::path &out_dir)
{
  std::filesystem::create_directories(out_dir / "sessions");
  for(const auto &r : report.results)
    if(r.session)
      write_file(out_dir / "sessions" / (r.entry.id + ".json"), to_json(*r.session).dump(2) + "\n");

  write_file(out_dir / "report.csv", report_csv(report));

  const auto &sum = report.summary;
  {
    std::ostringstream ss;
    ss << "# invsynth passk v1\n";
    ss << "k,expected_solved,union_houdini_solved\n";
    const std::size_t rows = std::max(sum.pass_at_k.size(), sum.union_houdini_solved.size());
    for(std::size_t k = 0; k < rows; ++k)
    {
      ss << (k + 1) << ',';
      if(k < sum.pass_at_k.size())
        ss << fixed(sum.pass_at_k[k].expected_solved);
      ss << ',';
      if(k < sum.union_houdini_solved.size())
        ss << fixed(sum.union_houdini_solved[k]);
      ss << '\n';
    }
    write_file(out_dir / "passk.csv", ss.str());
  }

  nlohmann::json solved = {
    {"schema", "invsynth.solved_sets"},
    {"schema_version", 1},
    {"provider", report.provider},
    {"prompt", report.prompt},
    {"no_houdini", sum.ids_no_houdini},
    {"houdini", sum.ids_houdini},
    {"repair", sum.ids_repair},
  };
  write_file(out_dir / "solved_sets.json", solved.dump(2) + "\n");

  nlohmann::json summary = {
    {"schema", "invsynth.summary"},
    {"schema_version", 1},
    {"provider", report.provider},
    {"prompt", report.prompt},
    {"benchmarks", sum.benchmarks},
    {"attempted", sum.attempted},
    {"solved_no_houdini", sum.solved_no_houdini},
    {"solved_houdini", sum.solved_houdini},
    {"solved_repair", sum.solved_repair},
  };
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

std::vector<session_record> load_sessions(const std::filesystem::path &out_dir)
{
  std::vector<std::filesystem::path> files;
  const auto dir = out_dir / "sessions";
  if(!std::filesystem::is_directory(dir))
    return {};
  for(const auto &f : std::filesystem::directory_iterator(dir))
    if(f.is_regular_file() && f.path().extension() == ".json")
      files.push_back(f.path());
  std::sort(files.begin(), files.end());
  std::vector<session_record> out;
  for(const auto &f : files)
    out.push_back(session_from_json(nlohmann::json::parse(read_file(f))));
  return out;
}

campaign_report run_campaign(const std::filesystem::path &corpus, const campaign_config &config)
{
  campaign_report report;
  report.prompt = config.loopy.prompt.name;

  auto entries = load_corpus(corpus);
  std::shared_ptr<provider> prov = make_provider(config.provider_spec, config.offline_budget, config.endpoint_config);
  if(!config.record_log.empty())
    prov = std::make_shared<recording_provider>(prov, config.record_log);
  report.provider = prov->name();
  auto shared_solver = std::make_shared<solver>(config.solver);

  report.results.resize(entries.size());
  std::vector<std::size_t> work;
  for(std::size_t i = 0; i < entries.size(); ++i)
  {
    report.results[i].entry = std::move(entries[i]);
    const auto &e = report.results[i].entry;
    if(e.supported && e.expected != expectation::negative)
      work.push_back(i);
    else
      log_info(e.id + ": skipped (" + (e.supported ? std::string("expected negative") : e.unsupported_reason) + ")");
  }

  std::atomic<std::size_t> next{0};
  std::mutex fatal_mutex;
  std::exception_ptr fatal;
  auto worker = [&]() {
    oracle o(shared_solver, oracle_options{config.oracle_jobs});
    for(;;)
    {
      {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if(fatal)
          return;
      }
      const std::size_t w = next.fetch_add(1);
      if(w >= work.size())
        return;
      auto &r = report.results[work[w]];
      try
      {
        program p = parse_program(r.entry.normalized);
        loopy_config lc = config.loopy;
        lc.benchmark = r.entry.id;
        session_record s = loopy(o, p, *prov, lc);
        if(config.union_trials > 0 && s.error.empty())
        {
          for(std::size_t k = 1; k <= s.completions.size(); ++k)
            r.union_rates.push_back(union_houdini_rate(o, p, s, k, config.union_trials, config.union_seed));
        }
        log_info(r.entry.id + ": " + (s.success ? "verified" : "not verified") + " (" + to_string(s.how) + ")");
        r.session = std::move(s);
      }
      catch(const auth_error &)
      {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        fatal = std::current_exception();
        return;
      }
      catch(const solver_integrity_error &)
      {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        fatal = std::current_exception();
        return;
      }
      catch(const error &e)
      {
        session_record s;
        s.benchmark = r.entry.id;
        s.provider = prov->name();
        s.prompt = config.loopy.prompt.name;
        s.error = e.what();
        log_warning(r.entry.id + ": " + e.what());
        r.session = std::move(s);
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(config.workers, std::max<std::size_t>(1, work.size())));
  std::vector<std::thread> pool;
  for(std::size_t i = 0; i < n_workers; ++i)
    pool.emplace_back(worker);
  for(auto &t : pool)
    t.join();
  if(fatal)
    std::rethrow_exception(fatal);

  report.summary = aggregate(report.results);
  write_report(report, config.out_dir);
  return report;
}

} // namespace invsynth
