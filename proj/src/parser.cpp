#include "treequery/parser.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

namespace treequery {

namespace {

enum class Tok {
  End,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Lt, Le, Gt, Ge, Eq,
  Comma, Slash, Pipe, Bang, Dot, Caret, Dollar, Amp, Hash, Minus,
  Ident, String, Number,
  Invalid,
};

struct Token {
  Tok kind = Tok::End;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;  // decoded string / identifier / number spelling
  bool integral = false;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Eq: return "'='";
    case Tok::Comma: return "','";
    case Tok::Slash: return "'/'";
    case Tok::Pipe: return "'|'";
    case Tok::Bang: return "'!'";
    case Tok::Dot: return "'.'";
    case Tok::Caret: return "'^'";
    case Tok::Dollar: return "'$'";
    case Tok::Amp: return "'&'";
    case Tok::Hash: return "'#'";
    case Tok::Minus: return "'-'";
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::Number: return "number";
    case Tok::Invalid: return "invalid character";
  }
  return "token";
}

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

void append_utf8(std::string& out, unsigned cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
    Token t;
    t.start = pos_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      t.end = pos_;
      return t;
    }
    char c = src_[pos_];
    auto single = [&](Tok k) {
      ++pos_;
      t.kind = k;
      t.end = pos_;
      return t;
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case '{': return single(Tok::LBrace);
      case '}': return single(Tok::RBrace);
      case ',': return single(Tok::Comma);
      case '/': return single(Tok::Slash);
      case '|': return single(Tok::Pipe);
      case '!': return single(Tok::Bang);
      case '.': return single(Tok::Dot);
      case '^': return single(Tok::Caret);
      case '$': return single(Tok::Dollar);
      case '&': return single(Tok::Amp);
      case '#': return single(Tok::Hash);
      case '-': return single(Tok::Minus);
      case '=': return single(Tok::Eq);
      case '<':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
          pos_ += 2;
          t.kind = Tok::Le;
          t.end = pos_;
          return t;
        }
        return single(Tok::Lt);
      case '>':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
          pos_ += 2;
          t.kind = Tok::Ge;
          t.end = pos_;
          return t;
        }
        return single(Tok::Gt);
      case '"': return string(t);
      default: break;
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      t.kind = Tok::Ident;
      t.end = pos_;
      t.text = std::string(src_.substr(t.start, t.end - t.start));
      return t;
    }
    if (digit(c)) return number(t);
    ++pos_;
    t.kind = Tok::Invalid;
    t.end = pos_;
    return t;
  }

  std::size_t size() const { return src_.size(); }

 private:
  Token number(Token& t) {
    bool integral = true;
    while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && digit(src_[pos_ + 1])) {
      integral = false;
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && digit(src_[pos_])) {
        integral = false;
        while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      } else {
        pos_ = save;
      }
    }
    t.kind = Tok::Number;
    t.end = pos_;
    t.text = std::string(src_.substr(t.start, t.end - t.start));
    t.integral = integral;
    return t;
  }

  Token string(Token& t) {
    ++pos_;
    std::string out;
    while (pos_ < src_.size()) {
      char c = src_[pos_++];
      if (c == '"') {
        t.kind = Tok::String;
        t.end = pos_;
        t.text = std::move(out);
        return t;
      }
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= src_.size()) break;
      char e = src_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'u': {
          if (pos_ + 4 > src_.size()) return invalid(t);
          unsigned cp = 0;
          for (int i = 0; i < 4; ++i) {
            char h = src_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') {
              cp |= static_cast<unsigned>(h - '0');
            } else if (h >= 'a' && h <= 'f') {
              cp |= static_cast<unsigned>(h - 'a' + 10);
            } else if (h >= 'A' && h <= 'F') {
              cp |= static_cast<unsigned>(h - 'A' + 10);
            } else {
              return invalid(t);
            }
          }
          append_utf8(out, cp);
          break;
        }
        default: return invalid(t);
      }
    }
    return invalid(t);
  }

  Token invalid(Token& t) {
    t.kind = Tok::Invalid;
    t.end = pos_;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

constexpr int kMaxNesting = 200;
constexpr int kMaxCount = 1000000000;

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  QueryTarget target() {
    if (cur_.kind == Tok::Minus || is_keyword("exists") || is_keyword("forall")) {
      throw Error(ErrorCode::DanglingEC, "element composition clause has no query core",
                  span_of(cur_));
    }
    QueryTarget t;
    std::size_t start = cur_.start;
    t.core = core();
    while (cur_.kind == Tok::Minus) t.ec.push_back(ec_clause());
    expect_end();
    t.span = {start, last_end_};
    renumber(t);
    return t;
  }

 private:
  // Core ------------------------------------------------------------------

  TargetCore core() {
    bool explicit_rep = false;
    PathPattern p = path(&explicit_rep);
    if (cur_.kind == Tok::LBracket) {
      if (p.steps.size() != 1 || explicit_rep) {
        fail("a branch must follow a single node without repetition", {"'/'", "'-'"});
      }
      BranchPattern b = branch(0);
      return SubtreeCore{std::move(p.steps.front().node), std::move(b)};
    }
    if (p.steps.size() == 1 && !explicit_rep) return std::move(p.steps.front().node);
    return p;
  }

  ECClause ec_clause() {
    ECClause c;
    c.span.start = cur_.start;
    advance();  // '-'
    if (is_keyword("exists")) {
      c.quantifier = Quantifier::Exists;
    } else if (is_keyword("forall")) {
      c.quantifier = Quantifier::ForAll;
    } else {
      fail("expected a quantifier", {"'exists'", "'forall'"});
    }
    advance();
    expect(Tok::Lt);
    c.path = path(nullptr);
    expect(Tok::Gt);
    c.occurrences = optional_rep();
    c.span.end = last_end_;
    return c;
  }

  PathPattern path(bool* last_rep_explicit) {
    PathPattern p;
    p.span.start = cur_.start;
    while (true) {
      PathStep step;
      step.node = node_pattern();
      bool explicit_rep = cur_.kind == Tok::LBrace;
      step.rep = optional_rep();
      if (last_rep_explicit) *last_rep_explicit = explicit_rep || p.steps.size() > 0;
      p.steps.push_back(std::move(step));
      if (cur_.kind != Tok::Slash) break;
      advance();
    }
    p.span.end = last_end_;
    return p;
  }

  NodePattern node_pattern() {
    std::vector<NodePattern> atoms;
    atoms.push_back(atom());
    while (cur_.kind == Tok::Pipe) {
      advance();
      if (atoms.size() >= static_cast<std::size_t>(kMaxNesting)) {
        fail("alternation chain too long", {});
      }
      atoms.push_back(atom());
    }
    while (atoms.size() > 1) {
      NodePattern tail = std::move(atoms.back());
      atoms.pop_back();
      atoms.back().alternative = std::move(tail);
      atoms.back().span.end = atoms.back().alternative->span.end;
    }
    return std::move(atoms.front());
  }

  NodePattern atom() {
    NodePattern n;
    n.span.start = cur_.start;
    if (cur_.kind == Tok::Bang) {
      n.negated = true;
      advance();
    }
    switch (cur_.kind) {
      case Tok::Dot: n.kind = NodeKind::Wildcard; advance(); break;
      case Tok::Caret: n.kind = NodeKind::Root; advance(); break;
      case Tok::Dollar: n.kind = NodeKind::Leaf; advance(); break;
      case Tok::LParen: {
        advance();
        if (cur_.kind == Tok::Dot || cur_.kind == Tok::Caret || cur_.kind == Tok::Dollar) {
          n.kind = cur_.kind == Tok::Dot     ? NodeKind::Wildcard
                   : cur_.kind == Tok::Caret ? NodeKind::Root
                                             : NodeKind::Leaf;
          advance();
        } else {
          n.kind = NodeKind::Custom;
          n.predicates.push_back(predicate());
          while (cur_.kind == Tok::Comma) {
            advance();
            n.predicates.push_back(predicate());
          }
        }
        expect(Tok::RParen);
        break;
      }
      default:
        fail("expected a node", {"'('", "'.'", "'^'", "'$'", "'!'"});
    }
    n.span.end = last_end_;
    return n;
  }

  Predicate predicate() {
    Predicate p;
    p.span.start = cur_.start;
    if (cur_.kind == Tok::Ident || cur_.kind == Tok::String) {
      p.attribute = cur_.text;
      advance();
    } else {
      fail("expected an attribute name", {"identifier", "string", "'.'", "'^'", "'$'"});
    }
    switch (cur_.kind) {
      case Tok::Gt: p.op = CompareOp::GT; break;
      case Tok::Ge: p.op = CompareOp::GE; break;
      case Tok::Lt: p.op = CompareOp::LT; break;
      case Tok::Le: p.op = CompareOp::LE; break;
      case Tok::Eq: p.op = CompareOp::EQ; break;
      default:
        if (is_keyword("in")) {
          p.op = CompareOp::IN;
        } else {
          fail("expected a comparison operator", {"'>'", "'>='", "'<'", "'<='", "'='", "'in'"});
        }
    }
    advance();
    if (p.op == CompareOp::IN) {
      p.rhs = AttributeValue(string_list());
    } else {
      p.rhs = rhs();
    }
    p.span.end = last_end_;
    return p;
  }

  StringList string_list() {
    expect(Tok::LBracket);
    StringList list;
    if (cur_.kind != Tok::RBracket) {
      while (true) {
        if (cur_.kind != Tok::String) fail("expected a string", {"string"});
        list.push_back(cur_.text);
        advance();
        if (cur_.kind != Tok::Comma) break;
        advance();
      }
    }
    expect(Tok::RBracket);
    return list;
  }

  PredicateRhs rhs() {
    switch (cur_.kind) {
      case Tok::String: {
        std::string s = cur_.text;
        advance();
        return AttributeValue(std::move(s));
      }
      case Tok::Number:
      case Tok::Minus:
        return AttributeValue(number());
      case Tok::Amp: {
        advance();
        return RelativeRef{signed_int()};
      }
      case Tok::Hash: {
        advance();
        return AbsoluteRef{signed_int()};
      }
      default:
        fail("expected a value", {"number", "string", "'&'", "'#'"});
    }
  }

  double number() {
    bool negative = false;
    if (cur_.kind == Tok::Minus) {
      negative = true;
      advance();
    }
    if (cur_.kind != Tok::Number) fail("expected a number", {"number"});
    double value = 0;
    auto [ptr, ec] = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), value);
    if (ec != std::errc() || ptr != cur_.text.data() + cur_.text.size()) {
      fail("number out of range", {});
    }
    advance();
    return negative ? -value : value;
  }

  int signed_int() {
    bool negative = false;
    if (cur_.kind == Tok::Minus) {
      negative = true;
      advance();
    }
    int v = integer();
    return negative ? -v : v;
  }

  int integer() {
    if (cur_.kind != Tok::Number || !cur_.integral) fail("expected an integer", {"integer"});
    long long value = 0;
    auto [ptr, ec] =
        std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), value);
    if (ec != std::errc() || ptr != cur_.text.data() + cur_.text.size() || value > kMaxCount) {
      fail("integer out of range", {});
    }
    advance();
    return static_cast<int>(value);
  }

  Repetition optional_rep() {
    if (cur_.kind != Tok::LBrace) return {};
    std::size_t start = cur_.start;
    advance();
    Repetition r;
    bool has_min = cur_.kind == Tok::Number;
    r.min = has_min ? integer() : 0;
    if (cur_.kind == Tok::Comma) {
      advance();
      if (cur_.kind == Tok::Number) {
        r.max = integer();
      } else {
        r.max = std::nullopt;
      }
    } else {
      if (!has_min) fail("expected a repetition count", {"integer", "','"});
      r.max = r.min;
    }
    expect(Tok::RBrace);
    if (r.max && *r.max < r.min) {
      throw Error(ErrorCode::RepetitionError,
                  "repetition maximum " + std::to_string(*r.max) + " is below minimum " +
                      std::to_string(r.min),
                  SourceSpan{start, last_end_});
    }
    return r;
  }

  BranchPattern branch(int depth) {
    if (depth >= kMaxNesting) fail("branches nested too deeply", {});
    BranchPattern b;
    b.span.start = cur_.start;
    expect(Tok::LBracket);
    while (true) {
      BranchArm arm;
      arm.span.start = cur_.start;
      expect(Tok::Lt);
      arm.path = path(nullptr);
      if (cur_.kind == Tok::LBracket) arm.branch = branch(depth + 1);
      expect(Tok::Gt);
      arm.rep = optional_rep();
      arm.span.end = last_end_;
      b.arms.push_back(std::move(arm));
      if (cur_.kind != Tok::Comma) break;
      advance();
    }
    expect(Tok::RBracket);
    b.span.end = last_end_;
    return b;
  }

  // Token plumbing ----------------------------------------------------------

  void advance() {
    last_end_ = cur_.end;
    cur_ = lexer_.next();
    if (cur_.kind == Tok::Invalid) {
      throw Error(ErrorCode::SyntaxError, "invalid token", span_of(cur_));
    }
  }

  bool is_keyword(const char* word) const { return cur_.kind == Tok::Ident && cur_.text == word; }

  void expect(Tok kind) {
    if (cur_.kind != kind) {
      fail(std::string("expected ") + describe(kind) + ", found " + describe(cur_.kind),
           {describe(kind)});
    }
    advance();
  }

  void expect_end() {
    if (cur_.kind != Tok::End) {
      fail(std::string("unexpected ") + describe(cur_.kind),
           {"end of input", "'-'", "'/'", "'{'", "'['", "'|'"});
    }
  }

  SourceSpan span_of(const Token& t) const {
    std::size_t end = t.end > t.start ? t.end : t.start;
    return {t.start, std::min(end, lexer_.size())};
  }

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected) {
    throw Error(ErrorCode::SyntaxError, message, span_of(cur_), std::move(expected));
  }

  Lexer lexer_;
  Token cur_;
  std::size_t last_end_ = 0;
};

// Formatting ------------------------------------------------------------------

bool is_identifier(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (char c : s) {
    if (!ident_char(c)) return false;
  }
  return true;
}

void quote(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void format_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void format_rep(std::string& out, const Repetition& r, bool force) {
  if (!force && r.min == 1 && r.max == 1) return;
  out += '{';
  out += std::to_string(r.min);
  if (!r.max) {
    out += ",}";
    return;
  }
  if (*r.max != r.min) {
    out += ',';
    out += std::to_string(*r.max);
  }
  out += '}';
}

void format_predicate(std::string& out, const Predicate& p) {
  if (is_identifier(p.attribute)) {
    out += p.attribute;
  } else {
    quote(out, p.attribute);
  }
  if (p.op == CompareOp::IN) {
    out += " in ";
  } else {
    out += to_string(p.op);
  }
  if (const auto* lit = std::get_if<AttributeValue>(&p.rhs)) {
    if (lit->is_number()) {
      format_number(out, lit->number());
    } else if (lit->is_text()) {
      quote(out, lit->text());
    } else {
      out += '[';
      for (std::size_t i = 0; i < lit->list().size(); ++i) {
        if (i) out += ',';
        quote(out, lit->list()[i]);
      }
      out += ']';
    }
  } else if (const auto* rel = std::get_if<RelativeRef>(&p.rhs)) {
    out += '&';
    out += std::to_string(rel->offset);
  } else {
    out += '#';
    out += std::to_string(std::get<AbsoluteRef>(p.rhs).level);
  }
}

void format_node(std::string& out, const NodePattern& n) {
  for (const NodePattern* p = &n; p; p = p->alternative.get()) {
    if (p != &n) out += '|';
    if (p->negated) out += '!';
    switch (p->kind) {
      case NodeKind::Wildcard: out += '.'; break;
      case NodeKind::Root: out += '^'; break;
      case NodeKind::Leaf: out += '$'; break;
      case NodeKind::Custom:
        out += '(';
        for (std::size_t i = 0; i < p->predicates.size(); ++i) {
          if (i) out += ',';
          format_predicate(out, p->predicates[i]);
        }
        out += ')';
        break;
    }
  }
}

void format_path(std::string& out, const PathPattern& p, bool force_single_rep) {
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (i) out += '/';
    format_node(out, p.steps[i].node);
    format_rep(out, p.steps[i].rep, force_single_rep && p.steps.size() == 1);
  }
}

void format_branch(std::string& out, const BranchPattern& b) {
  out += '[';
  for (std::size_t i = 0; i < b.arms.size(); ++i) {
    if (i) out += ',';
    out += '<';
    format_path(out, b.arms[i].path, false);
    if (b.arms[i].branch) format_branch(out, *b.arms[i].branch);
    out += '>';
    format_rep(out, b.arms[i].rep, false);
  }
  out += ']';
}

}  // namespace

QueryTarget parse(std::string_view text) { return Parser(text).target(); }

std::string format(const NodePattern& node) {
  std::string out;
  format_node(out, node);
  return out;
}

std::string format(const PathPattern& path) {
  std::string out;
  format_path(out, path, false);
  return out;
}

std::string format(const Repetition& rep) {
  std::string out;
  format_rep(out, rep, true);
  return out;
}

std::string format(const QueryTarget& target) {
  std::string out;
  std::visit(
      [&](const auto& core) {
        using T = std::decay_t<decltype(core)>;
        if constexpr (std::is_same_v<T, NodePattern>) {
          format_node(out, core);
        } else if constexpr (std::is_same_v<T, PathPattern>) {
          // A lone default step would read back as a node target.
          format_path(out, core, true);
        } else {
          format_node(out, core.head);
          format_branch(out, core.branch);
        }
      },
      target.core);
  for (const auto& clause : target.ec) {
    out += clause.quantifier == Quantifier::Exists ? " - exists <" : " - forall <";
    format_path(out, clause.path, false);
    out += '>';
    format_rep(out, clause.occurrences, false);
  }
  return out;
}

}  // namespace treequery
