#include "weylflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace weylflow {

namespace {

struct Token {
  enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
  Type type;
  double number = 0;
  std::string text;
  size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::Type::End;
      return;
    }
    const char c = src_[pos_];
    switch (c) {
      case '+': tok_.type = Token::Type::Plus; ++pos_; return;
      case '-': tok_.type = Token::Type::Minus; ++pos_; return;
      case '*': tok_.type = Token::Type::Star; ++pos_; return;
      case '/': tok_.type = Token::Type::Slash; ++pos_; return;
      case '^': tok_.type = Token::Type::Caret; ++pos_; return;
      case '(': tok_.type = Token::Type::LParen; ++pos_; return;
      case ')': tok_.type = Token::Type::RParen; ++pos_; return;
      case ',': tok_.type = Token::Type::Comma; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.data() + pos_;
      char* end = nullptr;
      tok_.number = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos_);
      pos_ += static_cast<size_t>(end - begin);
      tok_.type = Token::Type::Number;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.type = Token::Type::Ident;
      tok_.text.assign(src_.substr(start, pos_ - start));
      return;
    }
    throw ParseError("unexpected character", pos_);
  }

  std::string_view src_;
  size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(std::string_view src, std::vector<Expr::Node>& nodes) : lex_(src), nodes_(nodes) {}

  int parse() {
    int e = sum();
    if (lex_.peek().type != Token::Type::End)
      throw ParseError("unexpected trailing input", lex_.peek().offset);
    return e;
  }

 private:
  int add_node(Expr::Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Expr::Kind k, int a, int b, size_t off) {
    Expr::Node n;
    n.kind = k;
    n.a = a;
    n.b = b;
    n.offset = static_cast<std::uint32_t>(off);
    return add_node(n);
  }

  int sum() {
    int lhs = term();
    for (;;) {
      auto t = lex_.peek();
      if (t.type == Token::Type::Plus) {
        lex_.take();
        lhs = binary(Expr::Kind::Add, lhs, term(), t.offset);
      } else if (t.type == Token::Type::Minus) {
        lex_.take();
        lhs = binary(Expr::Kind::Sub, lhs, term(), t.offset);
      } else {
        return lhs;
      }
    }
  }

  int term() {
    int lhs = factor();
    for (;;) {
      auto t = lex_.peek();
      if (t.type == Token::Type::Star) {
        lex_.take();
        lhs = binary(Expr::Kind::Mul, lhs, factor(), t.offset);
      } else if (t.type == Token::Type::Slash) {
        lex_.take();
        lhs = binary(Expr::Kind::Div, lhs, factor(), t.offset);
      } else {
        return lhs;
      }
    }
  }

  // factor handles unary minus, which binds looser than '^'
  int factor() {
    auto t = lex_.peek();
    if (t.type == Token::Type::Minus) {
      lex_.take();
      Expr::Node n;
      n.kind = Expr::Kind::Neg;
      n.a = factor();
      n.offset = static_cast<std::uint32_t>(t.offset);
      return add_node(n);
    }
    return power();
  }

  int power() {
    int base = atom();
    auto t = lex_.peek();
    if (t.type != Token::Type::Caret) return base;
    lex_.take();
    int expo = factor();  // right-associative, allows a negated exponent
    // literal integral exponents take the exact repeated-multiplication path
    long long iexp = 0;
    if (integral_exponent(expo, &iexp)) {
      Expr::Node n;
      n.kind = Expr::Kind::PowInt;
      n.a = base;
      n.iexp = iexp;
      n.offset = static_cast<std::uint32_t>(t.offset);
      return add_node(n);
    }
    return binary(Expr::Kind::Pow, base, expo, t.offset);
  }

  bool integral_exponent(int node, long long* out) const {
    const Expr::Node& n = nodes_[node];
    if (n.kind == Expr::Kind::Neg) {
      long long inner = 0;
      if (!integral_exponent(n.a, &inner)) return false;
      *out = -inner;
      return true;
    }
    if (n.kind != Expr::Kind::Number) return false;
    double r = std::round(n.number);
    if (std::abs(n.number - r) > 1e-12 || std::abs(r) > 1e6) return false;
    *out = static_cast<long long>(r);
    return true;
  }

  int atom() {
    auto t = lex_.take();
    switch (t.type) {
      case Token::Type::Number: {
        Expr::Node n;
        n.kind = Expr::Kind::Number;
        n.number = t.number;
        n.offset = static_cast<std::uint32_t>(t.offset);
        return add_node(n);
      }
      case Token::Type::LParen: {
        int e = sum();
        auto r = lex_.take();
        if (r.type != Token::Type::RParen) throw ParseError("expected ')'", r.offset);
        return e;
      }
      case Token::Type::Ident:
        return ident(t);
      default:
        throw ParseError("expected a value", t.offset);
    }
  }

  int ident(const Token& t) {
    static const std::map<std::string, Expr::Kind, std::less<>> kFunctions = {
        {"sin", Expr::Kind::Sin}, {"cos", Expr::Kind::Cos}, {"exp", Expr::Kind::Exp},
        {"log", Expr::Kind::Log}, {"sqrt", Expr::Kind::Sqrt},
    };
    if (auto it = kFunctions.find(t.text); it != kFunctions.end()) {
      auto l = lex_.take();
      if (l.type != Token::Type::LParen)
        throw ParseError("function '" + t.text + "' expects one parenthesized argument", l.offset);
      int arg = sum();
      auto r = lex_.take();
      if (r.type == Token::Type::Comma) throw ParseError("function '" + t.text + "' takes one argument", r.offset);
      if (r.type != Token::Type::RParen) throw ParseError("expected ')'", r.offset);
      Expr::Node n;
      n.kind = it->second;
      n.a = arg;
      n.offset = static_cast<std::uint32_t>(t.offset);
      return add_node(n);
    }
    // coordinate variable x1..x6
    if (t.text.size() == 2 && t.text[0] == 'x' && t.text[1] >= '1' && t.text[1] <= '0' + kMaxVars) {
      Expr::Node n;
      n.kind = Expr::Kind::Coord;
      n.coord = t.text[1] - '1';
      n.offset = static_cast<std::uint32_t>(t.offset);
      return add_node(n);
    }
    if (lex_.peek().type == Token::Type::LParen)
      throw ParseError("unknown function '" + t.text + "'", t.offset);
    Expr::Node n;
    n.kind = Expr::Kind::Name;
    n.name = t.text;
    n.offset = static_cast<std::uint32_t>(t.offset);
    return add_node(n);
  }

  Lexer lex_;
  std::vector<Expr::Node>& nodes_;
};

}  // namespace

std::set<std::string> Expr::free_names() const {
  std::set<std::string> out;
  for (const auto& n : nodes_)
    if (n.kind == Kind::Name) out.insert(n.name);
  return out;
}

int Expr::max_coord() const {
  int m = 0;
  for (const auto& n : nodes_)
    if (n.kind == Kind::Coord) m = std::max(m, n.coord + 1);
  return m;
}

Expr parse_expr(std::string_view src) {
  size_t first = src.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw ParseError("empty expression", 0);
  Expr e;
  e.source_.assign(src);
  Parser p(src, e.nodes_);
  e.root_ = p.parse();
  return e;
}

Expr parse_expr(std::string_view src, const std::set<std::string>& allowed_names) {
  Expr e = parse_expr(src);
  for (const auto& n : e.nodes()) {
    if (n.kind == Expr::Kind::Name && !allowed_names.contains(n.name))
      throw ParseError("unknown identifier '" + n.name + "'", n.offset);
  }
  return e;
}

namespace {

Jet eval_node(const Expr& e, int idx, std::span<const double> point, int order,
              const Bindings& b) {
  const auto& n = e.nodes()[idx];
  const int nv = static_cast<int>(point.size());
  try {
    switch (n.kind) {
      case Expr::Kind::Number:
        return Jet::constant(nv, order, n.number);
      case Expr::Kind::Coord:
        if (n.coord >= nv) throw EvalError("coordinate index exceeds dimension", n.offset);
        return Jet::variable(nv, order, n.coord, point[n.coord]);
      case Expr::Kind::Name: {
        if (auto it = b.params.find(n.name); it != b.params.end())
          return Jet::constant(nv, order, it->second);
        if (auto it = b.profiles.find(n.name); it != b.profiles.end()) {
          Jet j = it->second(point, order);
          if (j.nvars() != nv || j.order() < order)
            throw EvalError("profile '" + n.name + "' returned a mismatched jet", n.offset);
          return j.order() == order ? j : j.truncated(order);
        }
        throw EvalError("unbound name '" + n.name + "'", n.offset);
      }
      case Expr::Kind::Add:
        return eval_node(e, n.a, point, order, b) + eval_node(e, n.b, point, order, b);
      case Expr::Kind::Sub:
        return eval_node(e, n.a, point, order, b) - eval_node(e, n.b, point, order, b);
      case Expr::Kind::Mul:
        return eval_node(e, n.a, point, order, b) * eval_node(e, n.b, point, order, b);
      case Expr::Kind::Div:
        return eval_node(e, n.a, point, order, b) / eval_node(e, n.b, point, order, b);
      case Expr::Kind::Pow: {
        Jet base = eval_node(e, n.a, point, order, b);
        Jet expo = eval_node(e, n.b, point, order, b);
        // general powers only for constant exponents; base must be positive
        for (int i = 1; i < expo.size(); ++i)
          if (expo.coeff(i) != 0.0)
            throw EvalError("exponent must be constant over the coordinates", n.offset);
        return base.pow_real(expo.value());
      }
      case Expr::Kind::PowInt:
        return eval_node(e, n.a, point, order, b).pow_int(n.iexp);
      case Expr::Kind::Neg:
        return -eval_node(e, n.a, point, order, b);
      case Expr::Kind::Sin:
        return sin(eval_node(e, n.a, point, order, b));
      case Expr::Kind::Cos:
        return cos(eval_node(e, n.a, point, order, b));
      case Expr::Kind::Exp:
        return exp(eval_node(e, n.a, point, order, b));
      case Expr::Kind::Log:
        return log(eval_node(e, n.a, point, order, b));
      case Expr::Kind::Sqrt:
        return sqrt(eval_node(e, n.a, point, order, b));
    }
  } catch (const JetDomainError& err) {
    throw EvalError(err.what(), n.offset);
  }
  throw EvalError("corrupt expression node", n.offset);
}

}  // namespace

Jet eval_jet(const Expr& e, std::span<const double> point, int order, const Bindings& bindings) {
  if (e.empty()) throw EvalError("empty expression", 0);
  if (point.empty() || point.size() > kMaxVars)
    throw EvalError("point dimension out of range", 0);
  if (order < 0 || order > kMaxJetOrder) throw EvalError("jet order out of range", 0);
  return eval_node(e, e.root(), point, order, bindings);
}

}  // namespace weylflow
