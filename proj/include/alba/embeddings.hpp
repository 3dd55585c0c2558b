#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace alba {

using Document = std::vector<std::string>;

enum class EmbeddingProvenance { Lsa, Projected, Table };

/// Word -> dense vector table. Rows follow `words` order.
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(std::vector<std::string> words, Eigen::MatrixXd vectors,
                   EmbeddingProvenance provenance = EmbeddingProvenance::Table);

    int dim() const { return static_cast<int>(vectors_.cols()); }
    std::size_t vocabulary_size() const { return words_.size(); }
    EmbeddingProvenance provenance() const { return provenance_; }

    const std::vector<std::string>& words() const { return words_; }
    const Eigen::MatrixXd& vectors() const { return vectors_; }

    /// Row index of `word`, or -1 when out of vocabulary.
    std::ptrdiff_t find(const std::string& word) const;

    /// Table file: optional `word,v1,...,vd` header, then one row per word.
    static EmbeddingModel load_table(const std::filesystem::path& path);
    void save_table(const std::filesystem::path& path) const;

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
    Eigen::MatrixXd vectors_;
    EmbeddingProvenance provenance_ = EmbeddingProvenance::Table;
};

/// Mean of the in-vocabulary word vectors; OOV words are skipped.
/// Throws AllWordsOutOfVocabulary when nothing is left.
Eigen::VectorXd embed_response(const EmbeddingModel& model, std::span<const std::string> words);

/// One document per line: {"words": [...]}.
std::vector<Document> load_corpus(const std::filesystem::path& path);

struct TermDocumentMatrix {
    std::vector<std::string> terms;     // sorted
    Eigen::SparseMatrix<double> counts; // terms x documents
};

TermDocumentMatrix build_term_document(std::span<const Document> corpus);

/// cell <- log(1 + tf) * (1 - H_t / log N), H_t the entropy of the term's
/// distribution over documents. With a single document the global weight is 1.
Eigen::SparseMatrix<double> log_entropy_weight(const Eigen::SparseMatrix<double>& counts);

struct TruncatedSvd {
    Eigen::MatrixXd u;              // m x rank
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd v;              // n x rank
    int iterations = 0;
    bool converged = false;
};

/// Randomized subspace iteration. Stops once every leading singular value
/// moves by less than tol * sigma_1 between sweeps. Columns are sign-fixed so
/// that each left vector's largest-magnitude entry is positive.
TruncatedSvd truncated_svd(const Eigen::SparseMatrix<double>& a, int rank, double tol = 1e-10,
                           int max_iterations = 500, std::uint64_t seed = 0x5eed);

struct LsaOptions {
    int dim = 10;
    int rank = 0; ///< 0 selects min(300, |V|, |docs|)
    bool scale_by_singular_values = true;
    double tol = 1e-10;
    int max_iterations = 500;
    std::uint64_t seed = 0x5eed;
};

/// Word vectors from the leading `dim` left singular directions of the
/// log-entropy weighted term-document matrix. An explicit rank above
/// min(|V|, |docs|) throws RankTooLarge; dim above rank likewise.
EmbeddingModel fit_lsa(std::span<const Document> corpus, const LsaOptions& options = {});

/// Principal-component projection with orthonormal components, ordered by
/// non-increasing explained variance.
struct ProjectionModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;         // d_in x d_out
    Eigen::VectorXd explained_variance; // length d_out
    double total_variance = 0.0;

    int input_dim() const { return static_cast<int>(components.rows()); }
    int output_dim() const { return static_cast<int>(components.cols()); }

    Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;
};

ProjectionModel fit_projection(const Eigen::MatrixXd& rows, int d_out);

/// Applies `projection` to every vector in `model`.
EmbeddingModel project(const EmbeddingModel& model, const ProjectionModel& projection);

} // namespace alba
