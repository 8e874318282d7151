#include <invsynth/errors.hpp>
#include <invsynth/parser.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <limits>
#include <set>

namespace invsynth {

namespace {

enum class tok
{
  ident,
  number,
  punct,
  string,
  annot_begin,
  annot_end,
  eof
};

struct token
{
  tok type = tok::eof;
  std::string text;
  int line = 1;
  int column = 1;
  std::size_t offset = 0;
  std::size_t end = 0;
  std::int64_t number = 0;
};

class lexer
{
public:
  explicit lexer(std::string_view src) : src_(src) {}

  std::vector<token> run()
  {
    while(pos_ < src_.size())
    {
      char c = src_[pos_];
      if(c == '\n')
      {
        if(line_annotation_)
        {
          emit(tok::annot_end, "");
          line_annotation_ = false;
        }
        advance();
        line_start_ = true;
        continue;
      }
      if(std::isspace(static_cast<unsigned char>(c)))
      {
        advance();
        continue;
      }
      if(c == '#' && line_start_ && !in_annotation())
      {
        skip_preprocessor_line();
        continue;
      }
      line_start_ = false;
      if(starts_with("//"))
      {
        if(peek(2) == '@' && !in_annotation())
        {
          emit_span(tok::annot_begin, "//@", 3);
          line_annotation_ = true;
        }
        else
          skip_to_eol();
        continue;
      }
      if(starts_with("/*"))
      {
        if(peek(2) == '@' && !in_annotation())
        {
          emit_span(tok::annot_begin, "/*@", 3);
          block_annotation_ = true;
        }
        else
          skip_block_comment();
        continue;
      }
      if(block_annotation_ && starts_with("*/"))
      {
        emit_span(tok::annot_end, "*/", 2);
        block_annotation_ = false;
        continue;
      }
      if(in_annotation() && c == '@')
      {
        advance();
        continue;
      }
      if(std::isdigit(static_cast<unsigned char>(c)))
      {
        lex_number();
        continue;
      }
      if(
        std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
        (c == '\\' && std::isalpha(static_cast<unsigned char>(peek(1)))))
      {
        lex_ident();
        continue;
      }
      if(c == '"' || c == '\'')
      {
        lex_string(c);
        continue;
      }
      lex_punct();
    }
    if(line_annotation_)
      emit(tok::annot_end, "");
    if(block_annotation_)
      throw syntax_error("unterminated annotation", line_, column_);
    emit(tok::eof, "");
    return std::move(tokens_);
  }

private:
  bool in_annotation() const { return line_annotation_ || block_annotation_; }

  char peek(std::size_t k) const
  {
    return pos_ + k < src_.size() ? src_[pos_ + k] : '\0';
  }

  bool starts_with(std::string_view s) const
  {
    return src_.substr(pos_, s.size()) == s;
  }

  void advance()
  {
    if(src_[pos_] == '\n')
    {
      ++line_;
      column_ = 1;
    }
    else
      ++column_;
    ++pos_;
  }

  void emit(tok type, std::string text)
  {
    token t;
    t.type = type;
    t.text = std::move(text);
    t.line = line_;
    t.column = column_;
    t.offset = pos_;
    t.end = pos_;
    tokens_.push_back(std::move(t));
  }

  void emit_span(tok type, std::string text, std::size_t length)
  {
    token t;
    t.type = type;
    t.line = line_;
    t.column = column_;
    t.offset = pos_;
    for(std::size_t i = 0; i < length; ++i)
      advance();
    t.end = pos_;
    t.text = std::move(text);
    tokens_.push_back(std::move(t));
  }

  void skip_to_eol()
  {
    while(pos_ < src_.size() && src_[pos_] != '\n')
      advance();
  }

  void skip_preprocessor_line()
  {
    while(pos_ < src_.size() && src_[pos_] != '\n')
    {
      if(src_[pos_] == '\\' && peek(1) == '\n')
        advance();
      advance();
    }
  }

  void skip_block_comment()
  {
    int line = line_, column = column_;
    advance();
    advance();
    while(pos_ < src_.size() && !starts_with("*/"))
      advance();
    if(pos_ >= src_.size())
      throw syntax_error("unterminated comment", line, column);
    advance();
    advance();
  }

  void lex_number()
  {
    token t;
    t.type = tok::number;
    t.line = line_;
    t.column = column_;
    t.offset = pos_;
    int base = 10;
    if(src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X'))
    {
      base = 16;
      advance();
      advance();
    }
    else if(src_[pos_] == '0' && std::isdigit(static_cast<unsigned char>(peek(1))))
      base = 8;
    unsigned long long value = 0;
    bool overflow = false;
    while(pos_ < src_.size())
    {
      char c = src_[pos_];
      int digit;
      if(std::isdigit(static_cast<unsigned char>(c)))
        digit = c - '0';
      else if(base == 16 && std::isxdigit(static_cast<unsigned char>(c)))
        digit = std::tolower(c) - 'a' + 10;
      else
        break;
      if(digit >= base)
        throw syntax_error("invalid digit in integer literal", t.line, t.column);
      if(value > static_cast<unsigned long long>((std::numeric_limits<std::int64_t>::max() - digit) / base))
        overflow = true;
      value = value * base + digit;
      advance();
    }
    if(pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
      throw unsupported_feature("floating point");
    while(pos_ < src_.size() && std::strchr("uUlL", src_[pos_]) != nullptr)
      advance();
    if(pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      throw syntax_error("malformed integer literal", t.line, t.column);
    if(overflow)
      throw syntax_error("integer literal out of range", t.line, t.column);
    t.end = pos_;
    t.number = static_cast<std::int64_t>(value);
    t.text = std::string(src_.substr(t.offset, t.end - t.offset));
    tokens_.push_back(std::move(t));
  }

  void lex_ident()
  {
    token t;
    t.type = tok::ident;
    t.line = line_;
    t.column = column_;
    t.offset = pos_;
    advance();
    while(pos_ < src_.size() &&
          (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      advance();
    t.end = pos_;
    t.text = std::string(src_.substr(t.offset, t.end - t.offset));
    tokens_.push_back(std::move(t));
  }

  void lex_string(char quote)
  {
    token t;
    t.type = tok::string;
    t.line = line_;
    t.column = column_;
    t.offset = pos_;
    advance();
    while(pos_ < src_.size() && src_[pos_] != quote && src_[pos_] != '\n')
    {
      if(src_[pos_] == '\\')
        advance();
      if(pos_ < src_.size())
        advance();
    }
    if(pos_ >= src_.size() || src_[pos_] != quote)
      throw syntax_error("unterminated literal", t.line, t.column);
    advance();
    t.end = pos_;
    t.text = std::string(src_.substr(t.offset, t.end - t.offset));
    tokens_.push_back(std::move(t));
  }

  void lex_punct()
  {
    static constexpr std::array<std::string_view, 28> multi = {
      "<==>", "==>", "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||",
      "++",   "--",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=",
      "->",   "<<",  ">>",  "::",  "..", "<:", ":>", "##"};
    for(auto m : multi)
    {
      if(starts_with(m))
      {
        emit_span(tok::punct, std::string(m), m.size());
        return;
      }
    }
    char c = src_[pos_];
    if(std::strchr("+-*/%<>=!(){}[];,?:&|^~.", c) != nullptr || in_annotation())
    {
      emit_span(tok::punct, std::string(1, c), 1);
      return;
    }
    throw syntax_error(std::string("unexpected character '") + c + "'", line_, column_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  bool line_start_ = true;
  bool line_annotation_ = false;
  bool block_annotation_ = false;
  std::vector<token> tokens_;
};

enum class flavor
{
  c,   ///< C source: no implication, declared variables only
  acsl ///< annotation: implication, \true/\false, chained comparisons
};

bool is_nondet_function(const std::string &name)
{
  return name == "unknown_int" || name == "unknown_uint" || name == "unknown" ||
         name == "unknown_bool";
}

const std::set<std::string> &type_keywords()
{
  static const std::set<std::string> words = {
    "int",    "unsigned", "signed", "long",  "short", "char",   "void",
    "_Bool",  "bool",     "const",  "volatile", "static", "extern",
    "register", "float",  "double", "struct", "union", "enum",  "typedef",
    "inline", "auto"};
  return words;
}

struct parsed_type
{
  bool is_void = false;
  int_kind kind = int_kind::signed_int;
};

struct loop_annotation
{
  std::vector<candidate> candidates;
  std::size_t begin = 0;
  std::size_t end = 0;
};

class parser
{
public:
  parser(std::string_view src, std::vector<token> tokens, bool check_decls)
    : src_(src), tokens_(std::move(tokens)), check_decls_(check_decls)
  {
  }

  // --- expressions ------------------------------------------------------

  expr parse_standalone_expression()
  {
    expr e = expression(flavor::acsl);
    if(!at(tok::eof))
      fail("unexpected '" + cur().text + "' after expression");
    if(contains_kind(e, expr_kind::nondet))
      fail("nondeterministic call in an annotation");
    return to_bool(e, flavor::acsl);
  }

  // --- programs ---------------------------------------------------------

  annotated_program parse_translation_unit()
  {
    bool seen_function = false;
    while(!at(tok::eof))
    {
      if(at(tok::annot_begin))
        fail("annotation outside a function");
      if(accept(";"))
        continue;
      if(cur().type != tok::ident || type_keywords().count(cur().text) == 0)
      {
        if(cur().type == tok::ident && is_type_start_lookalike())
          fail("unknown type name '" + cur().text + "'");
        fail("expected a declaration, found '" + cur().text + "'");
      }
      parsed_type type = parse_type(true);
      if(accept("*"))
        throw unsupported_feature("pointers");
      const token &name = expect_ident();
      if(accept("("))
      {
        bool has_params = parse_parameter_list();
        if(accept(";"))
          continue; // prototype
        if(!peek_is("{"))
          fail("expected '{' or ';' after function declarator");
        if(is_intrinsic(name.text))
        {
          skip_balanced_block(); // stub definitions of the verifier intrinsics
          continue;
        }
        if(seen_function)
          throw unsupported_feature("multiple functions");
        if(has_params)
          throw unsupported_feature("function parameters");
        seen_function = true;
        prog_.name = name.text;
        prog_.returns_int = !type.is_void;
        parse_function_body();
        continue;
      }
      throw unsupported_feature("global variables");
    }
    if(!seen_function)
      throw unsupported_feature("no function");
    if(!seen_loop_)
      throw unsupported_feature("no loop");

    prog_.prefix = stmt::sequence(std::move(prefix_items_));
    prog_.suffix = stmt::sequence(std::move(suffix_items_));
    prog_.source_text = std::string(src_);
    annotated_program out;
    if(loop_annotation_)
    {
      prog_.annotation_span = std::make_pair(loop_annotation_->begin, loop_annotation_->end);
      for(auto &c : loop_annotation_->candidates)
        out.candidates.insert(std::move(c));
    }
    derive_obligations(prog_);
    out.prog = std::move(prog_);
    return out;
  }

private:
  static bool is_intrinsic(const std::string &f)
  {
    return f == "assume" || f == "assert" || f == "reach_error" || f == "abort" ||
           is_nondet_function(f);
  }

  void skip_balanced_block()
  {
    int depth = 0;
    do
    {
      if(at(tok::eof))
        fail("unterminated function body");
      if(peek_is("{"))
        ++depth;
      else if(peek_is("}"))
        --depth;
      ++pos_;
    } while(depth > 0);
  }

  // --- token helpers ----------------------------------------------------

  const token &cur() const { return tokens_[pos_]; }
  const token &peek_token(std::size_t k) const
  {
    return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
  }
  bool at(tok t) const { return cur().type == t; }
  bool peek_is(std::string_view text) const
  {
    return (cur().type == tok::punct || cur().type == tok::ident) && cur().text == text;
  }
  bool accept(std::string_view text)
  {
    if(peek_is(text))
    {
      ++pos_;
      return true;
    }
    return false;
  }
  const token &expect(std::string_view text)
  {
    if(!peek_is(text))
      fail("expected '" + std::string(text) + "', found " + describe(cur()));
    return tokens_[pos_++];
  }
  const token &expect_ident()
  {
    if(!at(tok::ident))
      fail("expected an identifier, found " + describe(cur()));
    return tokens_[pos_++];
  }
  static std::string describe(const token &t)
  {
    switch(t.type)
    {
    case tok::eof: return "end of input";
    case tok::annot_begin: return "annotation";
    case tok::annot_end: return "end of annotation";
    default: return "'" + t.text + "'";
    }
  }
  [[noreturn]] void fail(const std::string &message) const
  {
    throw syntax_error(message, cur().line, cur().column);
  }

  bool is_type_start_lookalike() const
  {
    // `foo bar` at file scope: an unknown typedef name
    return peek_token(1).type == tok::ident;
  }

  // --- types and declarations --------------------------------------------

  bool at_type() const
  {
    return at(tok::ident) && type_keywords().count(cur().text) != 0;
  }

  parsed_type parse_type(bool allow_void)
  {
    parsed_type t;
    bool any = false;
    bool saw_void = false;
    while(at_type())
    {
      const std::string &w = cur().text;
      if(w == "float" || w == "double")
        throw unsupported_feature("floating point");
      if(w == "struct" || w == "union" || w == "enum")
        throw unsupported_feature(w);
      if(w == "typedef")
        throw unsupported_feature("typedef");
      if(w == "unsigned")
        t.kind = int_kind::unsigned_int;
      if(w == "void")
        saw_void = true;
      if(w == "_Bool" || w == "bool")
        t.kind = int_kind::unsigned_int;
      any = true;
      ++pos_;
    }
    if(!any)
      fail("expected a type");
    if(saw_void && !allow_void)
      fail("variable of type void");
    t.is_void = saw_void;
    return t;
  }

  bool parse_parameter_list()
  {
    if(accept(")"))
      return false;
    if(peek_is("void") && peek_token(1).text == ")")
    {
      pos_ += 2;
      return false;
    }
    int depth = 1;
    while(depth > 0)
    {
      if(at(tok::eof))
        fail("unterminated parameter list");
      if(peek_is("("))
        ++depth;
      else if(peek_is(")"))
        --depth;
      ++pos_;
    }
    return true;
  }

  decl_scope current_scope() const
  {
    switch(phase_)
    {
    case phase::prefix: return decl_scope::function;
    case phase::body: return decl_scope::loop_body;
    default: return decl_scope::after_loop;
    }
  }

  void parse_declaration(std::vector<stmt> &out)
  {
    parsed_type type = parse_type(false);
    do
    {
      if(peek_is("*"))
        throw unsupported_feature("pointers");
      const token &name = expect_ident();
      if(peek_is("["))
        throw unsupported_feature("arrays");
      if(peek_is("("))
        throw unsupported_feature("local function declarations");
      if(prog_.find_decl(name.text) != nullptr)
        throw unsupported_feature("redeclaration of '" + name.text + "'");
      prog_.decls.push_back({name.text, type.kind, current_scope()});
      if(accept("="))
        out.push_back(assignment_rhs(name.text));
    } while(accept(","));
    expect(";");
  }

  // --- statements ---------------------------------------------------------

  enum class phase
  {
    prefix,
    body,
    suffix
  };

  struct context
  {
    bool in_loop = false;
    bool in_for = false;
  };

  void parse_function_body()
  {
    expect("{");
    sink_ = &prefix_items_;
    while(!accept("}"))
    {
      if(at(tok::eof))
        fail("expected '}' at end of function");
      parse_top_item();
    }
    if(pending_annotation_)
      fail("loop annotation is not followed by a loop");
  }

  void parse_top_item()
  {
    if(peek_is("{"))
    {
      ++pos_;
      while(!accept("}"))
      {
        if(at(tok::eof))
          fail("expected '}'");
        parse_top_item();
      }
      return;
    }
    if(peek_is("while") || peek_is("for") || peek_is("do"))
    {
      if(seen_loop_)
        throw unsupported_feature("multiple loops");
      parse_loop();
      return;
    }
    if(at(tok::annot_begin))
    {
      if(pending_annotation_)
        fail("loop annotation is not followed by a loop");
      parse_annotation(*sink_, true);
      return;
    }
    if(pending_annotation_)
      fail("loop annotation is not followed by a loop");
    parse_statement(*sink_, context{});
  }

  void parse_loop()
  {
    const token &keyword = cur();
    std::size_t line_begin = keyword.offset;
    while(line_begin > 0 && src_[line_begin - 1] != '\n')
      --line_begin;
    prog_.loop_line_offset = line_begin;
    if(pending_annotation_)
    {
      loop_annotation_ = std::move(pending_annotation_);
      pending_annotation_.reset();
    }

    if(accept("do"))
      throw unsupported_feature("do-while loop");

    bool is_for = keyword.text == "for";
    ++pos_;
    expect("(");
    std::vector<stmt> step;
    if(is_for)
    {
      if(!accept(";"))
      {
        if(at_type())
          parse_declaration(*sink_);
        else
        {
          simple_statements(*sink_);
          expect(";");
        }
      }
      if(peek_is(";"))
        prog_.loop_guard = bool_const(true);
      else
        prog_.loop_guard = condition();
      expect(";");
      if(!peek_is(")"))
        simple_statements(step);
    }
    else
      prog_.loop_guard = condition();
    expect(")");

    seen_loop_ = true;
    phase_ = phase::body;
    std::vector<stmt> body;
    parse_statement(body, context{true, is_for});
    body.insert(body.end(), step.begin(), step.end());
    prog_.loop_body = flatten_single_block(std::move(body));
    phase_ = phase::suffix;
    sink_ = &suffix_items_;
  }

  /// `while(c) { ... }` parses to one seq item; unwrap it so the body is
  /// the block itself.
  static stmt flatten_single_block(std::vector<stmt> items)
  {
    if(items.size() == 1 && items.front().kind == stmt_kind::seq)
      return std::move(items.front());
    return stmt::sequence(std::move(items));
  }

  stmt block_of(const context &ctx)
  {
    std::vector<stmt> items;
    parse_statement(items, ctx);
    return flatten_single_block(std::move(items));
  }

  void parse_statement(std::vector<stmt> &out, const context &ctx)
  {
    if(accept(";"))
      return;
    if(accept("{"))
    {
      std::vector<stmt> items;
      while(!accept("}"))
      {
        if(at(tok::eof))
          fail("expected '}'");
        parse_statement(items, ctx);
      }
      out.push_back(stmt::sequence(std::move(items)));
      return;
    }
    if(at(tok::annot_begin))
    {
      parse_annotation(out, false);
      return;
    }
    if(at_type())
    {
      parse_declaration(out);
      return;
    }
    if(at(tok::ident))
    {
      const std::string &w = cur().text;
      if(w == "if")
      {
        ++pos_;
        expect("(");
        expr c = condition();
        expect(")");
        stmt then_branch = block_of(ctx);
        stmt else_branch = stmt::sequence({});
        if(accept("else"))
          else_branch = block_of(ctx);
        out.push_back(stmt::if_else(c, std::move(then_branch), std::move(else_branch)));
        return;
      }
      if(w == "while" || w == "for" || w == "do")
      {
        if(ctx.in_loop)
          throw unsupported_feature("nested loop");
        if(seen_loop_)
          throw unsupported_feature("multiple loops");
        throw unsupported_feature("loop inside a conditional");
      }
      if(w == "return")
      {
        ++pos_;
        if(!peek_is(";"))
          int_expression(flavor::c);
        expect(";");
        out.push_back(stmt::return_());
        return;
      }
      if(w == "break" || w == "continue")
      {
        if(!ctx.in_loop)
          fail("'" + w + "' outside of a loop");
        if(w == "continue" && ctx.in_for)
          throw unsupported_feature("continue in a for loop");
        ++pos_;
        expect(";");
        out.push_back(w == "break" ? stmt::break_() : stmt::continue_());
        return;
      }
      if(w == "goto")
        throw unsupported_feature("goto");
      if(w == "switch" || w == "case" || w == "default")
        throw unsupported_feature("switch");
      if(peek_token(1).type == tok::punct && peek_token(1).text == ":")
        throw unsupported_feature("labels");
    }
    simple_statements(out);
    expect(";");
  }

  /// Assignment, increment, or intrinsic call, without the trailing ';'.
  void simple_statements(std::vector<stmt> &out)
  {
    do
    {
      stmt s = simple_statement();
      if(s.kind != stmt_kind::skip)
        out.push_back(std::move(s));
    } while(accept(","));
  }

  stmt simple_statement()
  {
    if(peek_is("++") || peek_is("--"))
    {
      bool inc = cur().text == "++";
      ++pos_;
      const token &v = expect_ident();
      require_declared(v);
      return increment(v.text, inc);
    }
    const token &first = expect_ident();
    if(accept("("))
      return intrinsic_call(first);
    require_declared(first);
    if(peek_is("["))
      throw unsupported_feature("arrays");
    if(peek_is("->") || peek_is("."))
      throw unsupported_feature("struct member access");
    if(accept("++"))
      return increment(first.text, true);
    if(accept("--"))
      return increment(first.text, false);
    if(accept("="))
      return assignment_rhs(first.text);
    static const std::array<std::pair<std::string_view, expr_kind>, 5> compound = {{
      {"+=", expr_kind::add},
      {"-=", expr_kind::sub},
      {"*=", expr_kind::mul},
      {"/=", expr_kind::div},
      {"%=", expr_kind::mod},
    }};
    for(const auto &[op, kind] : compound)
    {
      if(accept(op))
      {
        expr rhs = int_expression(flavor::c);
        return stmt::assign(first.text, binary(kind, var(first.text), rhs));
      }
    }
    if(peek_is("&=") || peek_is("|=") || peek_is("^=") || peek_is("<<=") || peek_is(">>="))
      throw unsupported_feature("bitwise operators");
    fail("expected an assignment or call, found " + describe(cur()));
  }

  static stmt increment(const std::string &v, bool up)
  {
    return stmt::assign(v, binary(up ? expr_kind::add : expr_kind::sub, var(v), int_const(1)));
  }

  stmt assignment_rhs(const std::string &target)
  {
    if(at(tok::ident) && peek_token(1).text == "(" && peek_token(1).type == tok::punct)
    {
      const std::string &callee = cur().text;
      if(is_nondet_function(callee) && peek_token(2).text == ")")
      {
        pos_ += 3;
        return stmt::havoc(target);
      }
      if(callee == "unknown_float" || callee == "unknown_double")
        throw unsupported_feature("floating point");
    }
    expr rhs = int_expression(flavor::c);
    if(peek_is("="))
      throw unsupported_feature("chained assignment");
    return stmt::assign(target, rhs);
  }

  stmt intrinsic_call(const token &callee)
  {
    const std::string &f = callee.text;
    source_location at{callee.line, callee.column};
    if(f == "assume" || f == "assert")
    {
      expr c = condition();
      expect(")");
      if(c.kind() == expr_kind::nondet)
        throw unsupported_feature("nondeterministic " + f);
      return f == "assume" ? stmt::assume(c) : stmt::assertion(c, at);
    }
    if(f == "reach_error" || f == "abort")
    {
      expect(")");
      return f == "abort" ? stmt::return_() : stmt::assertion(bool_const(false), at);
    }
    if(is_nondet_function(f))
    {
      expect(")");
      return stmt::skip();
    }
    throw unsupported_feature("call to '" + f + "'");
  }

  void require_declared(const token &t) const
  {
    if(check_decls_ && prog_.find_decl(t.text) == nullptr)
      throw syntax_error("undeclared variable '" + t.text + "'", t.line, t.column);
  }

  // --- annotations --------------------------------------------------------

  void parse_annotation(std::vector<stmt> &out, bool top_level)
  {
    const token &begin = cur();
    ++pos_;
    bool has_invariants = false;
    bool has_other = false;
    loop_annotation block;
    while(!at(tok::annot_end))
    {
      if(at(tok::eof))
        fail("unterminated annotation");
      if(peek_is("assert"))
      {
        source_location at{cur().line, cur().column};
        ++pos_;
        expr e = to_bool(expression(flavor::acsl), flavor::acsl);
        expect(";");
        out.push_back(stmt::assertion(e, at));
        has_other = true;
        continue;
      }
      if(peek_is("loop"))
      {
        ++pos_;
        const token &clause = expect_ident();
        if(clause.text == "invariant")
        {
          std::size_t from = clause.end;
          while(!(cur().type == tok::punct && cur().text == ";"))
          {
            if(at(tok::annot_end) || at(tok::eof))
              fail("expected ';' after loop invariant");
            ++pos_;
          }
          std::string text(src_.substr(from, cur().offset - from));
          ++pos_;
          block.candidates.push_back(parse_invariant(trim(text), block.candidates.size()));
          has_invariants = true;
          continue;
        }
        // loop assigns / loop variant: not used by this checker
        while(!(cur().type == tok::punct && cur().text == ";"))
        {
          if(at(tok::annot_end) || at(tok::eof))
            fail("expected ';' after loop clause");
          ++pos_;
        }
        ++pos_;
        continue;
      }
      fail("unsupported annotation " + describe(cur()));
    }
    const token &end = cur();
    ++pos_;
    if(!has_invariants)
      return;
    if(!top_level || phase_ != phase::prefix || has_other)
      throw syntax_error("loop annotation must directly precede the loop", begin.line, begin.column);
    std::size_t from = begin.offset;
    while(from > 0 && src_[from - 1] != '\n')
      --from;
    std::size_t to = end.end;
    while(to < src_.size() && src_[to] != '\n')
      ++to;
    if(to < src_.size())
      ++to;
    block.begin = from;
    block.end = to;
    pending_annotation_ = std::move(block);
  }

  static std::string trim(const std::string &s)
  {
    std::size_t b = 0, e = s.size();
    while(b < e && std::isspace(static_cast<unsigned char>(s[b])))
      ++b;
    while(e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
      --e;
    return s.substr(b, e - b);
  }

  // --- expression grammar -------------------------------------------------

  expr condition()
  {
    expr e = expression(flavor::c);
    if(e.kind() == expr_kind::nondet)
      return e;
    if(contains_kind(e, expr_kind::nondet))
      throw unsupported_feature("nondeterministic call inside an expression");
    return to_bool(e, flavor::c);
  }

  expr int_expression(flavor fl)
  {
    expr e = expression(fl);
    if(contains_kind(e, expr_kind::nondet))
      throw unsupported_feature("nondeterministic call inside an expression");
    return to_int(e, fl);
  }

  [[noreturn]] void type_error(const std::string &what, flavor fl) const
  {
    if(fl == flavor::c)
      throw unsupported_feature(what);
    fail(what);
  }

  expr to_bool(const expr &e, flavor)
  {
    if(e.is_boolean())
      return e;
    if(e.kind() == expr_kind::int_const)
      return bool_const(e.value() != 0);
    return binary(expr_kind::ne, e, int_const(0));
  }

  expr to_int(const expr &e, flavor fl)
  {
    if(e.is_boolean() && e.kind() != expr_kind::nondet)
      type_error("boolean value used as an integer", fl);
    return e;
  }

  expr expression(flavor fl)
  {
    expr lhs = disjunction_level(fl);
    if(peek_is("==>") || peek_is("<==>"))
    {
      if(fl == flavor::c)
        fail("'" + cur().text + "' is only allowed in annotations");
      if(accept("==>"))
      {
        expr rhs = expression(fl);
        return implies(to_bool(lhs, fl), to_bool(rhs, fl));
      }
      ++pos_;
      expr rhs = disjunction_level(fl);
      expr result = binary(expr_kind::iff, to_bool(lhs, fl), to_bool(rhs, fl));
      if(peek_is("<==>") || peek_is("==>"))
        fail("ambiguous mix of '<==>' and '==>'; add parentheses");
      return result;
    }
    if(peek_is("?"))
      type_error("conditional expression", fl);
    return lhs;
  }

  expr disjunction_level(flavor fl)
  {
    expr lhs = conjunction_level(fl);
    while(accept("||"))
    {
      expr rhs = conjunction_level(fl);
      lhs = to_bool(lhs, fl) || to_bool(rhs, fl);
    }
    if(peek_is("|") || peek_is("^"))
      type_error("bitwise operators", fl);
    return lhs;
  }

  expr conjunction_level(flavor fl)
  {
    expr lhs = comparison_level(fl);
    while(accept("&&"))
    {
      expr rhs = comparison_level(fl);
      lhs = to_bool(lhs, fl) && to_bool(rhs, fl);
    }
    if(peek_is("&"))
      type_error("bitwise operators", fl);
    return lhs;
  }

  static std::optional<expr_kind> comparison_op(const token &t)
  {
    if(t.type != tok::punct)
      return std::nullopt;
    if(t.text == "==") return expr_kind::eq;
    if(t.text == "!=") return expr_kind::ne;
    if(t.text == "<") return expr_kind::lt;
    if(t.text == "<=") return expr_kind::le;
    if(t.text == ">") return expr_kind::gt;
    if(t.text == ">=") return expr_kind::ge;
    return std::nullopt;
  }

  expr comparison_level(flavor fl)
  {
    expr first = additive_level(fl);
    std::vector<expr> links;
    expr left = first;
    while(auto op = comparison_op(cur()))
    {
      ++pos_;
      expr right = additive_level(fl);
      if(!links.empty() && fl == flavor::c)
        type_error("chained comparison", fl);
      links.push_back(binary(*op, to_int(left, fl), to_int(right, fl)));
      left = right;
    }
    if(links.empty())
      return first;
    return conjunction(links);
  }

  expr additive_level(flavor fl)
  {
    expr lhs = multiplicative_level(fl);
    while(peek_is("+") || peek_is("-"))
    {
      expr_kind k = cur().text == "+" ? expr_kind::add : expr_kind::sub;
      ++pos_;
      expr rhs = multiplicative_level(fl);
      lhs = binary(k, to_int(lhs, fl), to_int(rhs, fl));
    }
    if(peek_is("<<") || peek_is(">>"))
      type_error("shift operators", fl);
    return lhs;
  }

  expr multiplicative_level(flavor fl)
  {
    expr lhs = unary_level(fl);
    while(peek_is("*") || peek_is("/") || peek_is("%"))
    {
      expr_kind k = cur().text == "*"   ? expr_kind::mul
                    : cur().text == "/" ? expr_kind::div
                                        : expr_kind::mod;
      ++pos_;
      expr rhs = unary_level(fl);
      if(
        (k == expr_kind::div || k == expr_kind::mod) &&
        rhs.kind() == expr_kind::int_const && rhs.value() == 0)
        fail("division by zero");
      lhs = binary(k, to_int(lhs, fl), to_int(rhs, fl));
    }
    return lhs;
  }

  expr unary_level(flavor fl)
  {
    if(accept("-"))
    {
      if(at(tok::number))
      {
        std::int64_t v = cur().number;
        ++pos_;
        return int_const(-v);
      }
      return unary(expr_kind::neg, to_int(unary_level(fl), fl));
    }
    if(accept("+"))
      return to_int(unary_level(fl), fl);
    if(accept("!"))
      return !to_bool(unary_level(fl), fl);
    if(peek_is("~"))
      type_error("bitwise operators", fl);
    if(peek_is("++") || peek_is("--"))
      type_error("side effect inside an expression", fl);
    if(peek_is("*") || peek_is("&"))
      throw unsupported_feature("pointers");
    return primary(fl);
  }

  expr primary(flavor fl)
  {
    if(at(tok::number))
    {
      std::int64_t v = cur().number;
      ++pos_;
      return int_const(v);
    }
    if(accept("("))
    {
      if(at_type())
        type_error("casts", fl);
      expr e = expression(fl);
      expect(")");
      return e;
    }
    if(at(tok::ident))
    {
      const token &t = cur();
      ++pos_;
      if(t.text == "\\true")
        return bool_const(true);
      if(t.text == "\\false")
        return bool_const(false);
      if(t.text[0] == '\\')
        fail("unsupported construct '" + t.text + "'");
      if(peek_is("("))
      {
        if(is_nondet_function(t.text) && peek_token(1).text == ")")
        {
          pos_ += 2;
          return nondet();
        }
        if(t.text == "unknown_float" || t.text == "unknown_double")
          throw unsupported_feature("floating point");
        if(fl == flavor::acsl)
          throw syntax_error("unknown function '" + t.text + "'", t.line, t.column);
        throw unsupported_feature("call to '" + t.text + "'");
      }
      if(peek_is("["))
        type_error("arrays", fl);
      if(peek_is("->") || peek_is("."))
        type_error("struct member access", fl);
      if(peek_is("++") || peek_is("--"))
        type_error("side effect inside an expression", fl);
      if(type_keywords().count(t.text) != 0 || t.text == "if" || t.text == "while")
        throw syntax_error("unexpected keyword '" + t.text + "'", t.line, t.column);
      if(fl == flavor::c || check_decls_)
        require_declared(t);
      return var(t.text);
    }
    if(at(tok::string))
      type_error("string literals", fl);
    fail("expected an expression, found " + describe(cur()));
  }

  std::string_view src_;
  std::vector<token> tokens_;
  std::size_t pos_ = 0;
  bool check_decls_;

  program prog_;
  phase phase_ = phase::prefix;
  bool seen_loop_ = false;
  std::vector<stmt> prefix_items_;
  std::vector<stmt> suffix_items_;
  std::vector<stmt> *sink_ = &prefix_items_;
  std::optional<loop_annotation> pending_annotation_;
  std::optional<loop_annotation> loop_annotation_;
};

} // namespace

annotated_program parse_annotated(std::string_view text)
{
  auto tokens = lexer(text).run();
  parser p(text, std::move(tokens), true);
  return p.parse_translation_unit();
}

program parse_program(std::string_view text)
{
  return parse_annotated(text).prog;
}

expr parse_expression(std::string_view text)
{
  std::vector<token> tokens;
  try
  {
    // annotation lexing rules: backslash keywords, stray characters become
    // tokens and fail in the parser with a position
    std::string wrapped = "/*@" + std::string(text) + "*/";
    tokens = lexer(wrapped).run();
    tokens.erase(tokens.begin());
    tokens.erase(tokens.end() - 2);
    for(auto &t : tokens)
    {
      t.offset = t.offset >= 3 ? t.offset - 3 : 0;
      t.end = t.end >= 3 ? t.end - 3 : 0;
      if(t.line == 1)
        t.column = std::max(1, t.column - 3);
    }
  }
  catch(const unsupported_feature &u)
  {
    throw syntax_error(u.construct(), 1, 1);
  }
  parser p(text, std::move(tokens), false);
  try
  {
    return p.parse_standalone_expression();
  }
  catch(const unsupported_feature &u)
  {
    throw syntax_error(u.construct(), 1, 1);
  }
}

candidate parse_invariant(std::string_view text, std::size_t id)
{
  candidate c;
  c.source = std::string(text);
  c.id = id;
  try
  {
    c.parsed = parse_expression(text);
  }
  catch(const syntax_error &e)
  {
    c.parse_error = e.what();
  }
  return c;
}

} // namespace invsynth
