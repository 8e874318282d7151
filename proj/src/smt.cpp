#include <invsynth/smt.hpp>

#include <invsynth/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char **environ;

namespace invsynth {

// --- configuration ------------------------------------------------------------

bool solver_command::uses_file() const
{
  return std::find(argv.begin(), argv.end(), "{file}") != argv.end();
}

solver_command parse_solver_command(const std::string &line)
{
  solver_command cmd;
  std::istringstream in(line);
  std::string word;
  while(in >> word)
    cmd.argv.push_back(word);
  if(cmd.argv.empty())
    throw error("empty solver command");
  auto slash = cmd.argv[0].find_last_of('/');
  cmd.name = slash == std::string::npos ? cmd.argv[0] : cmd.argv[0].substr(slash + 1);
  return cmd;
}

solver_config solver_config::defaults()
{
  solver_config c;
  c.solvers.push_back({"z3", {"z3", "-in", "-smt2"}});
  return c;
}

solver_config solver_config::from_environment(solver_config base)
{
  const char *env = std::getenv("INVSYNTH_SOLVERS");
  if(env == nullptr || *env == '\0')
    return base;
  base.solvers.clear();
  std::istringstream in(env);
  std::string item;
  while(std::getline(in, item, ';'))
    if(item.find_first_not_of(" \t") != std::string::npos)
      base.solvers.push_back(parse_solver_command(item));
  if(base.solvers.empty())
    throw error("INVSYNTH_SOLVERS names no solver");
  return base;
}

solver_config solver_config::from_json_file(const std::string &path, solver_config base)
{
  std::ifstream in(path);
  if(!in)
    throw error("cannot read solver config " + path);
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch(const nlohmann::json::exception &e)
  {
    throw error("malformed solver config " + path + ": " + e.what());
  }
  if(j.contains("solvers"))
  {
    base.solvers.clear();
    for(const auto &s : j.at("solvers"))
    {
      solver_command cmd;
      if(s.is_string())
        cmd = parse_solver_command(s.get<std::string>());
      else
      {
        cmd.argv = s.at("command").get<std::vector<std::string>>();
        if(cmd.argv.empty())
          throw error("empty solver command in " + path);
        cmd.name = s.value("name", cmd.argv[0]);
      }
      base.solvers.push_back(std::move(cmd));
    }
  }
  base.timeout_ms = j.value("timeout_ms", base.timeout_ms);
  base.cross_check = j.value("cross_check", base.cross_check);
  if(j.contains("semantics"))
  {
    auto s = j.at("semantics").get<std::string>();
    if(s == "wrap32")
      base.semantics = int_semantics::wrap32;
    else if(s == "unbounded")
      base.semantics = int_semantics::unbounded;
    else
      throw error("unknown semantics '" + s + "' in " + path);
  }
  if(base.solvers.empty())
    throw error(path + " names no solver");
  if(base.timeout_ms <= 0)
    throw error("timeout_ms must be positive");
  return base;
}

// --- emission ----------------------------------------------------------------

const char *to_string(smt_logic l)
{
  switch(l)
  {
  case smt_logic::qf_lia: return "QF_LIA";
  case smt_logic::qf_nia: return "QF_NIA";
  case smt_logic::lia: return "LIA";
  case smt_logic::nia: return "NIA";
  case smt_logic::qf_bv: return "QF_BV";
  case smt_logic::bv: return "BV";
  }
  return "ALL";
}

const char *to_string(check_status s)
{
  switch(s)
  {
  case check_status::proved: return "proved";
  case check_status::refuted: return "refuted";
  case check_status::unknown: return "unknown";
  case check_status::timeout: return "timeout";
  }
  return "?";
}

namespace {

bool is_nonlinear(const expr &e)
{
  switch(e.kind())
  {
  case expr_kind::mul:
    if(e.arg(0).kind() != expr_kind::int_const && e.arg(1).kind() != expr_kind::int_const)
      return true;
    break;
  case expr_kind::div:
  case expr_kind::mod:
    if(e.arg(1).kind() != expr_kind::int_const)
      return true;
    break;
  default:
    break;
  }
  for(const auto &a : e.args())
    if(is_nonlinear(a))
      return true;
  return false;
}

enum class polarity
{
  positive,
  negative,
  both
};

polarity flip(polarity p)
{
  switch(p)
  {
  case polarity::positive: return polarity::negative;
  case polarity::negative: return polarity::positive;
  default: return polarity::both;
  }
}

/// Replaces universals in positive position of the (valid-to-be) formula by
/// fresh constants. Those are exactly the quantifiers that turn existential
/// once the formula is negated.
class skolemizer
{
public:
  explicit skolemizer(std::set<std::string> taken) : taken_(std::move(taken)) {}

  expr run(const expr &e, polarity p)
  {
    switch(e.kind())
    {
    case expr_kind::not_:
      return unary(expr_kind::not_, run(e.arg(0), flip(p)));
    case expr_kind::and_:
    case expr_kind::or_:
      return binary(e.kind(), run(e.arg(0), p), run(e.arg(1), p));
    case expr_kind::implies:
      return binary(e.kind(), run(e.arg(0), flip(p)), run(e.arg(1), p));
    case expr_kind::iff:
      return binary(e.kind(), run(e.arg(0), polarity::both), run(e.arg(1), polarity::both));
    case expr_kind::forall:
    {
      if(p != polarity::positive)
        return forall(e.name(), run(e.arg(0), p));
      std::string name = e.name();
      for(int k = 1; taken_.count(name) != 0; ++k)
        name = e.name() + "!s" + std::to_string(k);
      taken_.insert(name);
      skolems.push_back(name);
      return run(substitute(e.arg(0), {{e.name(), var(name)}}), p);
    }
    default:
      return e;
    }
  }

  std::vector<std::string> skolems;

private:
  std::set<std::string> taken_;
};

void collect_names(const expr &e, std::set<std::string> &out)
{
  auto names = free_vars(e);
  out.insert(names.begin(), names.end());
}

std::string symbol(const std::string &name)
{
  return "|" + name + "|";
}

class term_printer
{
public:
  term_printer(const kind_map &kinds, int_semantics semantics) : kinds_(kinds), bv_(semantics == int_semantics::wrap32) {}

  std::string sort() const { return bv_ ? "(_ BitVec 32)" : "Int"; }

  std::string print(const expr &e)
  {
    switch(e.kind())
    {
    case expr_kind::int_const:
      return constant(e.value());
    case expr_kind::var:
      return symbol(e.name());
    case expr_kind::bool_const:
      return e.value() ? "true" : "false";
    case expr_kind::nondet:
      throw error("nondeterministic choice in a verification condition");
    case expr_kind::neg:
      return "(" + std::string(bv_ ? "bvneg" : "-") + " " + print(e.arg(0)) + ")";
    case expr_kind::not_:
      return "(not " + print(e.arg(0)) + ")";
    case expr_kind::forall:
      return "(forall ((" + symbol(e.name()) + " " + sort() + ")) " + print(e.arg(0)) + ")";
    default:
      break;
    }
    return "(" + op(e) + " " + print(e.arg(0)) + " " + print(e.arg(1)) + ")";
  }

private:
  std::string constant(std::int64_t v) const
  {
    if(bv_)
      return "(_ bv" + std::to_string(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v))) + " 32)";
    if(v < 0)
    {
      // -(2^63) has no positive counterpart in int64
      std::string digits = std::to_string(v).substr(1);
      return "(- " + digits + ")";
    }
    return std::to_string(v);
  }

  std::string op(const expr &e) const
  {
    const bool u = is_unsigned_term(e, kinds_) ||
                   (is_comparison(e.kind()) &&
                    (is_unsigned_term(e.arg(0), kinds_) || is_unsigned_term(e.arg(1), kinds_)));
    switch(e.kind())
    {
    case expr_kind::add: return bv_ ? "bvadd" : "+";
    case expr_kind::sub: return bv_ ? "bvsub" : "-";
    case expr_kind::mul: return bv_ ? "bvmul" : "*";
    case expr_kind::div: return bv_ ? (u ? "bvudiv" : "bvsdiv") : "div";
    case expr_kind::mod: return bv_ ? (u ? "bvurem" : "bvsrem") : "mod";
    case expr_kind::eq: return "=";
    case expr_kind::ne: return "distinct";
    case expr_kind::lt: return bv_ ? (u ? "bvult" : "bvslt") : "<";
    case expr_kind::le: return bv_ ? (u ? "bvule" : "bvsle") : "<=";
    case expr_kind::gt: return bv_ ? (u ? "bvugt" : "bvsgt") : ">";
    case expr_kind::ge: return bv_ ? (u ? "bvuge" : "bvsge") : ">=";
    case expr_kind::and_: return "and";
    case expr_kind::or_: return "or";
    case expr_kind::implies: return "=>";
    case expr_kind::iff: return "=";
    default: return "?";
    }
  }

  const kind_map &kinds_;
  bool bv_;
};

smt_logic logic_for(const expr &f, int_semantics semantics)
{
  const bool quantified = contains_kind(f, expr_kind::forall);
  if(semantics == int_semantics::wrap32)
    return quantified ? smt_logic::bv : smt_logic::qf_bv;
  if(is_nonlinear(f))
    return quantified ? smt_logic::nia : smt_logic::qf_nia;
  return quantified ? smt_logic::lia : smt_logic::qf_lia;
}

struct prepared_query
{
  expr formula; ///< after skolemization
  std::vector<std::string> constants;
  std::string script;
};

prepared_query prepare(const verification_condition &vc, const solver_config &config)
{
  std::set<std::string> taken;
  collect_names(vc.formula, taken);
  skolemizer sk(taken);
  prepared_query q;
  q.formula = sk.run(vc.formula, polarity::positive);

  std::set<std::string> constants = free_vars(q.formula);
  q.constants.assign(constants.begin(), constants.end());

  smt_logic logic = logic_for(q.formula, config.semantics);

  term_printer printer(vc.kinds, config.semantics);
  std::ostringstream out;
  out << "(set-option :produce-models true)\n";
  out << "(set-logic " << to_string(logic) << ")\n";
  for(const auto &c : q.constants)
    out << "(declare-fun " << symbol(c) << " () " << printer.sort() << ")\n";
  out << "(assert (not " << printer.print(q.formula) << "))\n";
  out << "(check-sat)\n(get-model)\n";
  q.script = out.str();
  return q;
}

} // namespace

smt_logic select_logic(const verification_condition &vc, int_semantics semantics)
{
  std::set<std::string> taken;
  collect_names(vc.formula, taken);
  skolemizer sk(taken);
  return logic_for(sk.run(vc.formula, polarity::positive), semantics);
}

std::string emit_smtlib(const verification_condition &vc, const solver_config &config)
{
  return prepare(vc, config).script;
}

// --- processes ---------------------------------------------------------------

process_result run_process(const std::vector<std::string> &argv, const std::string &input, int timeout_ms)
{
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if(pipe2(in_pipe, O_CLOEXEC) != 0)
    throw solver_spawn_error("pipe failed");
  if(pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0)
    throw solver_spawn_error("pipe failed");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], 2);

  std::vector<char *> args;
  for(const auto &a : argv)
    args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  if(rc != 0)
  {
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(err_pipe[0]);
    throw solver_spawn_error("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }

  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  process_result result;
  std::size_t written = 0;
  int in_fd = in_pipe[1];
  if(input.empty())
  {
    close(in_fd);
    in_fd = -1;
  }
  int fds[2] = {out_pipe[0], err_pipe[0]};
  std::string *sinks[2] = {&result.out, &result.err};

  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms);
  char buffer[4096];
  while(fds[0] >= 0 || fds[1] >= 0)
  {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if(left <= 0)
    {
      result.timed_out = true;
      break;
    }
    pollfd p[3];
    int n = 0;
    int slot[3];
    for(int i = 0; i < 2; ++i)
      if(fds[i] >= 0)
      {
        p[n] = {fds[i], POLLIN, 0};
        slot[n++] = i;
      }
    if(in_fd >= 0)
    {
      p[n] = {in_fd, POLLOUT, 0};
      slot[n++] = 2;
    }
    int ready = poll(p, n, static_cast<int>(left));
    if(ready < 0)
    {
      if(errno == EINTR)
        continue;
      break;
    }
    for(int i = 0; i < n; ++i)
    {
      if(p[i].revents == 0)
        continue;
      if(slot[i] == 2)
      {
        ssize_t w = write(in_fd, input.data() + written, input.size() - written);
        if(w > 0)
          written += static_cast<std::size_t>(w);
        if(w < 0 && errno != EAGAIN)
          written = input.size(); // child closed stdin
        if(written >= input.size())
        {
          close(in_fd);
          in_fd = -1;
        }
        continue;
      }
      ssize_t r = read(fds[slot[i]], buffer, sizeof buffer);
      if(r > 0)
        sinks[slot[i]]->append(buffer, static_cast<std::size_t>(r));
      else if(r == 0 || errno != EINTR)
      {
        close(fds[slot[i]]);
        fds[slot[i]] = -1;
      }
    }
  }
  if(in_fd >= 0)
    close(in_fd);
  for(int fd : fds)
    if(fd >= 0)
      close(fd);
  if(result.timed_out)
    kill(pid, SIGKILL);
  int status = 0;
  while(waitpid(pid, &status, 0) < 0 && errno == EINTR)
  {
  }
  if(WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else
    result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return result;
}

// --- output parsing -------------------------------------------------------------

namespace {

struct sexpr
{
  std::string atom;
  std::vector<sexpr> list;
  bool is_list = false;
};

class sexpr_reader
{
public:
  explicit sexpr_reader(std::string_view text) : text_(text) {}

  bool at_end()
  {
    skip_space();
    return pos_ >= text_.size();
  }

  sexpr read()
  {
    skip_space();
    if(pos_ >= text_.size())
      throw std::runtime_error("unexpected end of output");
    sexpr out;
    char c = text_[pos_];
    if(c == '(')
    {
      ++pos_;
      out.is_list = true;
      while(true)
      {
        skip_space();
        if(pos_ >= text_.size())
          throw std::runtime_error("unbalanced parenthesis");
        if(text_[pos_] == ')')
        {
          ++pos_;
          return out;
        }
        out.list.push_back(read());
      }
    }
    if(c == ')')
      throw std::runtime_error("unexpected ')'");
    if(c == '|')
    {
      auto end = text_.find('|', pos_ + 1);
      if(end == std::string_view::npos)
        throw std::runtime_error("unterminated quoted symbol");
      out.atom = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return out;
    }
    if(c == '"')
    {
      std::size_t i = pos_ + 1;
      while(i < text_.size())
      {
        if(text_[i] == '"')
        {
          if(i + 1 < text_.size() && text_[i + 1] == '"')
          {
            i += 2;
            continue;
          }
          break;
        }
        ++i;
      }
      out.atom = std::string(text_.substr(pos_, i + 1 - pos_));
      pos_ = i + 1;
      return out;
    }
    std::size_t start = pos_;
    while(pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
          text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    out.atom = std::string(text_.substr(start, pos_ - start));
    return out;
  }

private:
  void skip_space()
  {
    while(pos_ < text_.size())
    {
      if(std::isspace(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      else if(text_[pos_] == ';')
        while(pos_ < text_.size() && text_[pos_] != '\n')
          ++pos_;
      else
        break;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::int64_t parse_value(const sexpr &v)
{
  if(!v.is_list)
  {
    const std::string &a = v.atom;
    if(a.rfind("#x", 0) == 0)
      return static_cast<std::int64_t>(std::stoull(a.substr(2), nullptr, 16));
    if(a.rfind("#b", 0) == 0)
      return static_cast<std::int64_t>(std::stoull(a.substr(2), nullptr, 2));
    std::size_t used = 0;
    long long value = std::stoll(a, &used);
    if(used != a.size())
      throw std::runtime_error("not a number: " + a);
    return value;
  }
  if(v.list.size() == 2 && !v.list[0].is_list && v.list[0].atom == "-")
    return -parse_value(v.list[1]);
  if(v.list.size() == 3 && !v.list[0].is_list && v.list[0].atom == "_" && v.list[1].atom.rfind("bv", 0) == 0)
    return static_cast<std::int64_t>(std::stoull(v.list[1].atom.substr(2)));
  throw std::runtime_error("unsupported model value");
}

valuation parse_model(std::string_view text)
{
  valuation model;
  sexpr_reader reader(text);
  while(!reader.at_end())
  {
    sexpr top = reader.read();
    if(!top.is_list)
      continue;
    std::vector<sexpr> defs = top.list;
    if(!defs.empty() && !defs[0].is_list && defs[0].atom == "model")
      defs.erase(defs.begin());
    if(!defs.empty() && !defs[0].is_list && defs[0].atom == "error")
      continue;
    for(const auto &d : defs)
    {
      if(!d.is_list || d.list.size() != 5 || d.list[0].atom != "define-fun")
        continue;
      if(!d.list[2].is_list || !d.list[2].list.empty())
        continue; // functions with arguments come from the solver's internals
      try
      {
        model[d.list[1].atom] = parse_value(d.list[4]);
      }
      catch(const std::exception &)
      {
        // not an integer constant; the evaluator defaults it
      }
    }
  }
  return model;
}

std::string trim(const std::string &s)
{
  auto b = s.find_first_not_of(" \t\r\n");
  if(b == std::string::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class temp_file
{
public:
  explicit temp_file(const std::string &content)
  {
    char name[] = "/tmp/invsynth-XXXXXX.smt2";
    int fd = mkstemps(name, 5);
    if(fd < 0)
      throw solver_spawn_error("cannot create a temporary file");
    path_ = name;
    std::size_t done = 0;
    while(done < content.size())
    {
      ssize_t w = write(fd, content.data() + done, content.size() - done);
      if(w <= 0)
        break;
      done += static_cast<std::size_t>(w);
    }
    close(fd);
  }
  ~temp_file() { std::remove(path_.c_str()); }
  temp_file(const temp_file &) = delete;
  temp_file &operator=(const temp_file &) = delete;

  const std::string &path() const { return path_; }

private:
  std::string path_;
};

check_result run_one(
  const solver_command &cmd, const prepared_query &q, const verification_condition &vc,
  const solver_config &config)
{
  check_result r;
  r.solver = cmd.name;
  auto start = std::chrono::steady_clock::now();

  process_result p;
  if(cmd.uses_file())
  {
    temp_file file(q.script);
    std::vector<std::string> argv = cmd.argv;
    for(auto &a : argv)
      if(a == "{file}")
        a = file.path();
    p = run_process(argv, {}, config.timeout_ms);
  }
  else
    p = run_process(cmd.argv, q.script, config.timeout_ms);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if(p.timed_out)
  {
    r.status = check_status::timeout;
    return r;
  }
  std::string out = p.out;
  auto nl = out.find('\n');
  std::string first = trim(out.substr(0, nl));
  std::string rest = nl == std::string::npos ? std::string() : out.substr(nl + 1);
  if(first == "unsat")
    r.status = check_status::proved;
  else if(first == "unknown")
  {
    r.status = check_status::unknown;
    r.detail = trim(rest);
  }
  else if(first == "timeout")
    r.status = check_status::timeout;
  else if(first == "sat")
  {
    r.status = check_status::refuted;
    try
    {
      r.model = parse_model(rest);
    }
    catch(const std::exception &e)
    {
      throw solver_protocol_error(cmd.name + ": unreadable model: " + e.what());
    }
    eval_options opt;
    opt.semantics = config.semantics;
    opt.kinds = vc.kinds;
    r.model_confirmed = std::nullopt;
    if(auto v = evaluate_bool(q.formula, r.model, opt))
    {
      r.model_confirmed = !*v;
      if(*v)
      {
        r.status = check_status::unknown;
        r.detail = "model does not falsify the formula";
      }
    }
  }
  else
  {
    std::string why = trim(p.err.empty() ? out : p.err);
    if(why.size() > 300)
      why.resize(300);
    throw solver_protocol_error(
      cmd.name + ": unexpected output (exit " + std::to_string(p.exit_code) + "): " + why);
  }
  return r;
}

bool conclusive(const check_result &r)
{
  return r.status == check_status::proved || r.status == check_status::refuted;
}

} // namespace

check_result check_validity(const verification_condition &vc, const solver_config &config)
{
  if(config.solvers.empty())
    throw error("no solver configured");
  prepared_query q = prepare(vc, config);
  std::optional<check_result> answer;
  check_result last;
  for(const auto &cmd : config.solvers)
  {
    check_result r = run_one(cmd, q, vc, config);
    if(conclusive(r))
    {
      if(!answer)
        answer = r;
      else if(answer->status != r.status)
        throw solver_integrity_error(
          answer->solver + " and " + r.solver + " disagree on a " + to_string(vc.kind) + " condition");
      if(!config.cross_check)
        break;
    }
    last = std::move(r);
  }
  return answer ? *answer : last;
}

check_result solver::check(const verification_condition &vc)
{
  std::string key = emit_smtlib(vc, config_);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++queries_;
    auto it = cache_.find(key);
    if(it != cache_.end())
    {
      ++hits_;
      return it->second;
    }
  }
  check_result r = check_validity(vc, config_);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(std::move(key), r);
  return r;
}

std::size_t solver::queries() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return queries_;
}

std::size_t solver::cache_hits() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return hits_;
}

} // namespace invsynth
