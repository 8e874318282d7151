#include <invsynth/program.hpp>

#include <algorithm>
#include <cctype>

namespace invsynth {

stmt stmt::skip() { return stmt{}; }

stmt stmt::assign(std::string v, expr e)
{
  stmt s;
  s.kind = stmt_kind::assign;
  s.target = std::move(v);
  s.value = std::move(e);
  return s;
}

stmt stmt::havoc(std::string v)
{
  stmt s;
  s.kind = stmt_kind::havoc;
  s.target = std::move(v);
  return s;
}

stmt stmt::assume(expr e)
{
  stmt s;
  s.kind = stmt_kind::assume;
  s.value = std::move(e);
  return s;
}

stmt stmt::assertion(expr e, source_location at)
{
  stmt s;
  s.kind = stmt_kind::assert_;
  s.value = std::move(e);
  s.location = at;
  return s;
}

stmt stmt::sequence(std::vector<stmt> items)
{
  stmt s;
  s.kind = stmt_kind::seq;
  s.children = std::move(items);
  return s;
}

stmt stmt::if_else(expr cond, stmt then_branch, stmt else_branch)
{
  stmt s;
  s.kind = stmt_kind::if_else;
  s.value = std::move(cond);
  s.children = {std::move(then_branch), std::move(else_branch)};
  return s;
}

stmt stmt::return_()
{
  stmt s;
  s.kind = stmt_kind::return_;
  return s;
}

stmt stmt::break_()
{
  stmt s;
  s.kind = stmt_kind::break_;
  return s;
}

stmt stmt::continue_()
{
  stmt s;
  s.kind = stmt_kind::continue_;
  return s;
}

bool operator==(const stmt &a, const stmt &b)
{
  return a.kind == b.kind && a.target == b.target && a.value == b.value &&
         a.children == b.children;
}

std::vector<std::string> program::loop_head_vars() const
{
  std::vector<std::string> out;
  for(const auto &d : decls)
    if(d.scope == decl_scope::function)
      out.push_back(d.name);
  return out;
}

const declaration *program::find_decl(const std::string &n) const
{
  for(const auto &d : decls)
    if(d.name == n)
      return &d;
  return nullptr;
}

kind_map program::kinds() const
{
  kind_map out;
  for(const auto &d : decls)
    out[d.name] = d.kind;
  return out;
}

bool operator==(const program &a, const program &b)
{
  return a.name == b.name && a.returns_int == b.returns_int &&
         a.decls == b.decls && a.prefix == b.prefix &&
         a.loop_guard == b.loop_guard && a.loop_body == b.loop_body &&
         a.suffix == b.suffix;
}

std::string candidate::key() const
{
  if(parsed)
    return to_string(*parsed);
  std::string out;
  bool space = false;
  for(char c : source)
  {
    if(std::isspace(static_cast<unsigned char>(c)))
    {
      space = !out.empty();
      continue;
    }
    if(space)
      out += ' ';
    space = false;
    out += c;
  }
  return out;
}

candidate_set::candidate_set(std::initializer_list<candidate> items)
{
  for(const auto &c : items)
    insert(c);
}

bool candidate_set::insert(candidate c)
{
  std::string k = c.key();
  if(!index_.insert(k).second)
    return false;
  items_.push_back(std::move(c));
  keys_.push_back(std::move(k));
  return true;
}

void candidate_set::insert_all(const candidate_set &other)
{
  for(const auto &c : other)
    insert(c);
}

bool candidate_set::contains(const candidate &c) const
{
  return contains_key(c.key());
}

bool candidate_set::contains_key(const std::string &key) const
{
  return index_.count(key) != 0;
}

void candidate_set::remove(const candidate_set &victims)
{
  std::vector<candidate> items;
  std::vector<std::string> keys;
  for(std::size_t i = 0; i < items_.size(); ++i)
  {
    if(victims.contains_key(keys_[i]))
    {
      index_.erase(keys_[i]);
      continue;
    }
    items.push_back(std::move(items_[i]));
    keys.push_back(std::move(keys_[i]));
  }
  items_ = std::move(items);
  keys_ = std::move(keys);
}

void candidate_set::remove_key(const std::string &key)
{
  candidate_set victim;
  victim.index_.insert(key);
  remove(victim);
}

std::vector<std::string> candidate_set::sources() const
{
  std::vector<std::string> out;
  for(const auto &c : items_)
    out.push_back(c.source);
  return out;
}

std::vector<std::string> candidate_set::keys() const
{
  return keys_;
}

bool operator==(const candidate_set &a, const candidate_set &b)
{
  return a.keys_ == b.keys_;
}

} // namespace invsynth
