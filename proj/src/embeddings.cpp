#include "alba/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "json.hpp"

#include "alba/csv.hpp"
#include "alba/error.hpp"

namespace alba {

namespace {

// Largest-magnitude entry of every column made positive; the same flip is
// applied to the paired matrix so the factorization is unchanged.
void fix_signs(Eigen::MatrixXd& primary, Eigen::MatrixXd* paired)
{
    for (Eigen::Index c = 0; c < primary.cols(); ++c) {
        Eigen::Index arg = 0;
        primary.col(c).cwiseAbs().maxCoeff(&arg);
        if (primary(arg, c) < 0.0) {
            primary.col(c) *= -1.0;
            if (paired)
                paired->col(c) *= -1.0;
        }
    }
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

} // namespace

EmbeddingModel::EmbeddingModel(std::vector<std::string> words, Eigen::MatrixXd vectors,
                               EmbeddingProvenance provenance)
    : words_(std::move(words)), vectors_(std::move(vectors)), provenance_(provenance)
{
    if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows())
        throw Error(Errc::InvalidArgument, "embedding rows do not match vocabulary size");
    if (vectors_.cols() < 1)
        throw Error(Errc::InvalidArgument, "embedding dimension must be >= 1");
    if (!vectors_.allFinite())
        throw Error(Errc::InvalidArgument, "embedding contains non-finite values");
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (!index_.emplace(words_[i], i).second)
            throw Error(Errc::InvalidArgument, "duplicate vocabulary word " + words_[i]);
}

std::ptrdiff_t EmbeddingModel::find(const std::string& word) const
{
    auto it = index_.find(word);
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

EmbeddingModel EmbeddingModel::load_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot open " + path.string());
    std::vector<std::string> words;
    std::vector<double> values;
    std::size_t dim = 0;
    std::string line;
    std::vector<std::string> fields;
    std::size_t lineno = 0;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (!csv::split_record(line, fields) || fields.size() < 2)
            throw Error(Errc::MalformedRow, path.filename().string() + ":" + std::to_string(lineno) +
                                                ": expected word followed by values");
        if (lineno == 1 && fields[0] == "word")
            continue;
        if (dim == 0)
            dim = fields.size() - 1;
        if (fields.size() - 1 != dim)
            throw Error(Errc::MalformedRow, path.filename().string() + ":" + std::to_string(lineno) +
                                                ": inconsistent dimension");
        words.push_back(fields[0]);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            double v = 0.0;
            const auto& f = fields[k];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
                throw Error(Errc::MalformedRow, path.filename().string() + ":" +
                                                    std::to_string(lineno) + ": bad value");
            values.push_back(v);
        }
    }
    if (words.empty())
        throw Error(Errc::MalformedRow, path.string() + ": empty embedding table");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = values[static_cast<std::size_t>(r) * dim + static_cast<std::size_t>(c)];
    return EmbeddingModel(std::move(words), std::move(m), EmbeddingProvenance::Table);
}

void EmbeddingModel::save_table(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot write " + path.string());
    out << "word";
    for (int k = 1; k <= dim(); ++k)
        out << ",v" << k;
    out << '\n';
    for (std::size_t i = 0; i < words_.size(); ++i) {
        out << csv::escape(words_[i]);
        for (Eigen::Index c = 0; c < vectors_.cols(); ++c)
            out << ',' << csv::format_double(vectors_(static_cast<Eigen::Index>(i), c));
        out << '\n';
    }
}

Eigen::VectorXd embed_response(const EmbeddingModel& model, std::span<const std::string> words)
{
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.dim());
    int used = 0;
    for (const auto& w : words) {
        const auto row = model.find(w);
        if (row < 0)
            continue;
        sum += model.vectors().row(row).transpose();
        ++used;
    }
    if (used == 0)
        throw Error(Errc::AllWordsOutOfVocabulary, "no response word is in the vocabulary");
    return sum / static_cast<double>(used);
}

std::vector<Document> load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot open " + path.string());
    std::vector<Document> corpus;
    std::string line;
    std::size_t lineno = 0;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        try {
            auto j = nlohmann::json::parse(line);
            corpus.push_back(j.at("words").get<Document>());
        } catch (const nlohmann::json::exception&) {
            throw Error(Errc::MalformedRow,
                        path.filename().string() + ":" + std::to_string(lineno) + ": bad document");
        }
    }
    return corpus;
}

TermDocumentMatrix build_term_document(std::span<const Document> corpus)
{
    std::map<std::string, int> term_index;
    for (const auto& doc : corpus)
        for (const auto& w : doc)
            term_index.emplace(w, 0);
    TermDocumentMatrix out;
    out.terms.reserve(term_index.size());
    int next = 0;
    for (auto& [term, idx] : term_index) {
        idx = next++;
        out.terms.push_back(term);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t d = 0; d < corpus.size(); ++d)
        for (const auto& w : corpus[d])
            triplets.emplace_back(term_index.at(w), static_cast<int>(d), 1.0);
    out.counts.resize(static_cast<Eigen::Index>(out.terms.size()),
                      static_cast<Eigen::Index>(corpus.size()));
    out.counts.setFromTriplets(triplets.begin(), triplets.end()); // duplicates are summed
    out.counts.makeCompressed();
    return out;
}

Eigen::SparseMatrix<double> log_entropy_weight(const Eigen::SparseMatrix<double>& counts)
{
    const Eigen::Index n_docs = counts.cols();
    Eigen::VectorXd global_freq = Eigen::VectorXd::Zero(counts.rows());
    for (Eigen::Index c = 0; c < counts.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(counts, c); it; ++it)
            global_freq(it.row()) += it.value();

    Eigen::VectorXd entropy_sum = Eigen::VectorXd::Zero(counts.rows()); // sum p log p
    for (Eigen::Index c = 0; c < counts.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(counts, c); it; ++it) {
            const double p = it.value() / global_freq(it.row());
            if (p > 0.0)
                entropy_sum(it.row()) += p * std::log(p);
        }

    Eigen::VectorXd global_weight(counts.rows());
    const double log_n = n_docs > 1 ? std::log(static_cast<double>(n_docs)) : 0.0;
    for (Eigen::Index t = 0; t < counts.rows(); ++t) {
        double g = log_n > 0.0 ? 1.0 + entropy_sum(t) / log_n : 1.0;
        // round-off can leave a uniform term at +-1e-17
        if (std::abs(g) < 1e-14)
            g = 0.0;
        global_weight(t) = g;
    }

    Eigen::SparseMatrix<double> weighted = counts;
    for (Eigen::Index c = 0; c < weighted.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(weighted, c); it; ++it)
            it.valueRef() = std::log1p(it.value()) * global_weight(it.row());
    weighted.prune(0.0);
    return weighted;
}

TruncatedSvd truncated_svd(const Eigen::SparseMatrix<double>& a, int rank, double tol,
                           int max_iterations, std::uint64_t seed)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const Eigen::Index full = std::min(m, n);
    if (rank < 1 || rank > full)
        throw Error(Errc::RankTooLarge, "rank " + std::to_string(rank) + " exceeds min(rows, cols) = " +
                                            std::to_string(full));
    const Eigen::Index width = std::min<Eigen::Index>(full, rank + 10);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd omega(n, width);
    for (Eigen::Index c = 0; c < width; ++c)
        for (Eigen::Index r = 0; r < n; ++r)
            omega(r, c) = normal(rng);

    Eigen::MatrixXd q = orthonormal_basis(a * omega);
    Eigen::VectorXd previous = Eigen::VectorXd::Constant(rank, -1.0);
    TruncatedSvd out;
    Eigen::JacobiSVD<Eigen::MatrixXd> small;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::MatrixXd b = q.transpose() * a; // width x n
        small.compute(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd s = small.singularValues().head(rank);
        out.iterations = iter;
        const double scale = std::max(s(0), 1e-300);
        if ((s - previous).cwiseAbs().maxCoeff() <= tol * scale || width == full) {
            out.converged = true;
            break;
        }
        previous = s;
        const Eigen::MatrixXd z = orthonormal_basis(a.transpose() * q);
        q = orthonormal_basis(a * z);
    }
    out.u = q * small.matrixU().leftCols(rank);
    out.singular_values = small.singularValues().head(rank);
    out.v = small.matrixV().leftCols(rank);
    fix_signs(out.u, &out.v);
    return out;
}

EmbeddingModel fit_lsa(std::span<const Document> corpus, const LsaOptions& options)
{
    std::size_t tokens = 0;
    for (const auto& doc : corpus)
        tokens += doc.size();
    if (corpus.empty() || tokens == 0)
        throw Error(Errc::EmptyCorpus, "corpus has no words");

    auto td = build_term_document(corpus);
    const int full = static_cast<int>(std::min(td.counts.rows(), td.counts.cols()));
    const int rank = options.rank == 0 ? std::min(300, full) : options.rank;
    if (rank > full)
        throw Error(Errc::RankTooLarge, "rank " + std::to_string(rank) + " exceeds min(|V|, |docs|) = " +
                                            std::to_string(full));
    if (options.dim < 1 || options.dim > rank)
        throw Error(Errc::RankTooLarge, "embedding dimension must be in [1, rank]");

    const auto weighted = log_entropy_weight(td.counts);
    if (weighted.nonZeros() == 0)
        throw Error(Errc::DegenerateInput, "every term is uniformly spread; weighted matrix is zero");
    const auto svd = truncated_svd(weighted, rank, options.tol, options.max_iterations, options.seed);

    Eigen::MatrixXd vectors = svd.u.leftCols(options.dim);
    if (options.scale_by_singular_values)
        vectors = vectors * svd.singular_values.head(options.dim).asDiagonal();
    return EmbeddingModel(std::move(td.terms), std::move(vectors), EmbeddingProvenance::Lsa);
}

Eigen::VectorXd ProjectionModel::transform(const Eigen::VectorXd& x) const
{
    return components.transpose() * (x - mean);
}

Eigen::MatrixXd ProjectionModel::transform(const Eigen::MatrixXd& rows) const
{
    return (rows.rowwise() - mean.transpose()) * components;
}

ProjectionModel fit_projection(const Eigen::MatrixXd& rows, int d_out)
{
    const Eigen::Index n = rows.rows();
    const Eigen::Index d_in = rows.cols();
    if (d_out < 1 || d_out > d_in || n <= d_out)
        throw Error(Errc::InvalidArgument, "projection needs n > d_out >= 1 and d_out <= d_in");
    ProjectionModel out;
    out.mean = rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = rows.rowwise() - out.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    out.total_variance = cov.trace();
    if (!(out.total_variance > 0.0))
        throw Error(Errc::DegenerateInput, "input has zero variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // eigenvalues ascending; take from the back
    out.components.resize(d_in, d_out);
    out.explained_variance.resize(d_out);
    for (int k = 0; k < d_out; ++k) {
        const Eigen::Index src = d_in - 1 - k;
        out.components.col(k) = eig.eigenvectors().col(src);
        out.explained_variance(k) = std::max(0.0, eig.eigenvalues()(src));
    }
    fix_signs(out.components, nullptr);
    return out;
}

EmbeddingModel project(const EmbeddingModel& model, const ProjectionModel& projection)
{
    if (projection.input_dim() != model.dim())
        throw Error(Errc::InvalidArgument, "projection input dimension does not match embedding");
    return EmbeddingModel(model.words(), projection.transform(model.vectors()),
                          EmbeddingProvenance::Projected);
}

} // namespace alba
