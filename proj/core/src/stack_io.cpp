#include "ictx/stack_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ictx/measure_io.hpp"

namespace ictx {

namespace {

void write_matrix(std::ostream& os, const std::string& tag, const Mat& m) {
  os << tag;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      os << ' ' << format_double(m(r, c));
  os << "\n";
}

void write_vector(std::ostream& os, const std::string& tag, const Vec& v) {
  os << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v(i));
  os << "\n";
}

Mat read_matrix(std::istream& is, const std::string& tag, Eigen::Index rows,
                Eigen::Index cols) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("stack file: truncated");
  std::istringstream ls(line);
  std::string got;
  ls >> got;
  if (got != tag)
    throw std::runtime_error("stack file: expected '" + tag + "', got '" + got + "'");
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(ls >> m(r, c))) throw std::runtime_error("stack file: short matrix " + tag);
  return m;
}

long header_field(std::istringstream& hs, const std::string& key) {
  std::string tok;
  if (!(hs >> tok) || tok.rfind(key + "=", 0) != 0)
    throw std::runtime_error("stack file: expected field " + key);
  return std::stol(tok.substr(key.size() + 1));
}

}  // namespace

void write_stack(std::ostream& os, const LayerStack& stack) {
  os << "stack layers=" << stack.layers.size()
     << " masked=" << (stack.masked() ? 1 : 0) << "\n";
  for (const Layer& layer : stack.layers) {
    if (const auto* att = std::get_if<AttentionLayer>(&layer)) {
      const MultiHeadParams& p = att->params;
      os << "attention d_in=" << p.d_in << " d_head=" << p.d_head << " k=" << p.k
         << " heads=" << p.num_heads() << "\n";
      for (const MultiHeadParams::Head& h : p.heads) {
        write_matrix(os, "W", h.W);
        write_matrix(os, "K", h.params.K);
        write_matrix(os, "Q", h.params.Q);
        write_matrix(os, "V", h.params.V);
      }
    } else {
      const MlpParams& mlp = std::get<MlpParams>(layer);
      os << "mlp in=" << mlp.in_dim << " out=" << mlp.out_dim
         << " layers=" << mlp.layers.size() << "\n";
      for (const MlpParams::Layer& l : mlp.layers) {
        os << "layer act=" << (l.act == Activation::relu ? "relu" : "identity")
           << " rows=" << l.W.rows() << " cols=" << l.W.cols() << "\n";
        write_matrix(os, "W", l.W);
        write_vector(os, "b", l.b);
      }
    }
  }
}

LayerStack read_stack(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("stack file: empty");
  std::istringstream hs(line);
  std::string word;
  hs >> word;
  if (word != "stack") throw std::runtime_error("stack file: bad magic");
  const long count = header_field(hs, "layers");
  const long masked = header_field(hs, "masked");

  LayerStack stack;
  for (long li = 0; li < count; ++li) {
    if (!std::getline(is, line)) throw std::runtime_error("stack file: truncated");
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "attention") {
      MultiHeadParams p;
      p.d_in = static_cast<int>(header_field(ls, "d_in"));
      p.d_head = static_cast<int>(header_field(ls, "d_head"));
      p.k = static_cast<int>(header_field(ls, "k"));
      const long heads = header_field(ls, "heads");
      for (long h = 0; h < heads; ++h) {
        MultiHeadParams::Head head;
        head.W = read_matrix(is, "W", p.d_in, p.d_head);
        head.params.K = read_matrix(is, "K", p.k, p.d_in);
        head.params.Q = read_matrix(is, "Q", p.k, p.d_in);
        head.params.V = read_matrix(is, "V", p.d_head, p.d_in);
        p.heads.push_back(std::move(head));
      }
      stack.layers.emplace_back(AttentionLayer{std::move(p), masked == 1});
    } else if (kind == "mlp") {
      MlpParams mlp;
      mlp.in_dim = static_cast<int>(header_field(ls, "in"));
      mlp.out_dim = static_cast<int>(header_field(ls, "out"));
      const long nlayers = header_field(ls, "layers");
      for (long l = 0; l < nlayers; ++l) {
        if (!std::getline(is, line)) throw std::runtime_error("stack file: truncated");
        std::istringstream lls(line);
        std::string tok, act;
        lls >> tok;
        if (tok != "layer") throw std::runtime_error("stack file: expected layer");
        lls >> act;
        if (act.rfind("act=", 0) != 0) throw std::runtime_error("stack file: bad act");
        act = act.substr(4);
        const long rows = header_field(lls, "rows");
        const long cols = header_field(lls, "cols");
        MlpParams::Layer layer;
        layer.W = read_matrix(is, "W", rows, cols);
        Mat b = read_matrix(is, "b", 1, rows);
        layer.b = b.row(0).transpose();
        layer.act = act == "relu" ? Activation::relu : Activation::identity;
        mlp.layers.push_back(std::move(layer));
      }
      stack.layers.emplace_back(std::move(mlp));
    } else {
      throw std::runtime_error("stack file: unknown layer kind '" + kind + "'");
    }
  }
  stack.validate();
  return stack;
}

void save_stack(const std::string& path, const LayerStack& stack) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_stack(os, stack);
}

LayerStack load_stack(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_stack(is);
}

}  // namespace ictx
