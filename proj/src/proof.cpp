#include "wagon/proof.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "wagon/merkle.hpp"

namespace wagon::proof {

using nlohmann::json;

namespace {

constexpr const char* kTranscriptDomain = "wagon-fs-merkle-v1";

Digest leaf_hash(std::uint64_t wire, std::uint64_t value) {
    Bytes buf;
    put_le64(buf, wire);
    put_le64(buf, value);
    return sha256(buf);
}

struct Opening {
    std::uint64_t wire = 0;
    std::uint64_t value = 0;
    std::vector<Digest> path;
};

struct ChallengeOpenings {
    std::uint64_t constraint_index = 0;
    std::vector<Opening> openings;
};

Bytes encode_proof(const Digest& root, const std::vector<ChallengeOpenings>& challenges) {
    Bytes out;
    out.insert(out.end(), root.begin(), root.end());
    put_le64(out, challenges.size());
    for (const ChallengeOpenings& ch : challenges) {
        put_le64(out, ch.constraint_index);
        put_le64(out, ch.openings.size());
        for (const Opening& op : ch.openings) {
            put_le64(out, op.wire);
            put_le64(out, op.value);
            put_le64(out, op.path.size());
            for (const Digest& node : op.path) out.insert(out.end(), node.begin(), node.end());
        }
    }
    return out;
}

struct DecodedProof {
    Digest root{};
    std::vector<ChallengeOpenings> challenges;
};

// Returns nullopt on any shape error.
std::optional<DecodedProof> decode_proof(const Bytes& bytes) {
    DecodedProof dp;
    std::size_t pos = 0;
    auto need = [&](std::size_t n) { return pos + n <= bytes.size(); };
    if (!need(32 + 8)) return std::nullopt;
    std::copy_n(bytes.begin(), 32, dp.root.begin());
    pos = 32;
    std::uint64_t nch = get_le64(bytes.data() + pos);
    pos += 8;
    if (nch > 1'000'000) return std::nullopt;
    for (std::uint64_t c = 0; c < nch; ++c) {
        if (!need(16)) return std::nullopt;
        ChallengeOpenings ch;
        ch.constraint_index = get_le64(bytes.data() + pos);
        pos += 8;
        std::uint64_t nop = get_le64(bytes.data() + pos);
        pos += 8;
        if (nop > 10'000'000) return std::nullopt;
        for (std::uint64_t o = 0; o < nop; ++o) {
            if (!need(24)) return std::nullopt;
            Opening op;
            op.wire = get_le64(bytes.data() + pos);
            op.value = get_le64(bytes.data() + pos + 8);
            std::uint64_t plen = get_le64(bytes.data() + pos + 16);
            pos += 24;
            if (plen > 64 || !need(plen * 32)) return std::nullopt;
            for (std::uint64_t i = 0; i < plen; ++i) {
                Digest node{};
                std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), 32, node.begin());
                pos += 32;
                op.path.push_back(node);
            }
            ch.openings.push_back(std::move(op));
        }
        dp.challenges.push_back(std::move(ch));
    }
    if (pos != bytes.size()) return std::nullopt;
    return dp;
}

std::vector<std::uint32_t> row_support(const r1cs::Constraint& c) {
    std::set<std::uint32_t> wires;
    for (const auto& [idx, _] : c.a) wires.insert(idx);
    for (const auto& [idx, _] : c.b) wires.insert(idx);
    for (const auto& [idx, _] : c.c) wires.insert(idx);
    return {wires.begin(), wires.end()};
}

}  // namespace

std::vector<std::size_t> derive_challenges(const Digest& circuit_digest, const Digest& root,
                                           const std::vector<std::uint64_t>& public_inputs,
                                           std::size_t num_constraints, unsigned count) {
    Bytes transcript;
    const std::string domain = kTranscriptDomain;
    transcript.insert(transcript.end(), domain.begin(), domain.end());
    transcript.insert(transcript.end(), circuit_digest.begin(), circuit_digest.end());
    transcript.insert(transcript.end(), root.begin(), root.end());
    put_le64(transcript, public_inputs.size());
    for (auto v : public_inputs) put_le64(transcript, v);
    Digest seed = sha256(transcript);

    const std::uint64_t m = num_constraints;
    // Rejection sampling keeps the draw uniform mod m.
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % m + 1) % m;
    const bool reject_needed = rem != 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem + 1;

    std::vector<std::size_t> out;
    out.reserve(count);
    std::uint64_t counter = 0;
    while (out.size() < count) {
        Bytes block(seed.begin(), seed.end());
        put_le64(block, counter++);
        Digest d = sha256(block);
        for (int i = 0; i < 4 && out.size() < count; ++i) {
            std::uint64_t u = get_le64(d.data() + 8 * i);
            if (reject_needed && u >= limit) continue;
            out.push_back(static_cast<std::size_t>(u % m));
        }
    }
    return out;
}

std::pair<ProvingKey, VerificationKey> setup(const r1cs::R1CSInstance& instance,
                                             unsigned num_challenges) {
    if (num_challenges == 0)
        throw WagonError(ErrorCode::InvalidArgument, "challenge count must be positive");
    if (instance.constraints.empty())
        throw WagonError(ErrorCode::EmptyCircuit, "cannot set up an empty circuit");
    ProvingKey pk;
    pk.instance = instance;
    pk.num_challenges = num_challenges;
    VerificationKey vk;
    vk.circuit_digest = instance.circuit_digest();
    vk.num_wires = instance.num_wires;
    vk.num_public = instance.num_public;
    vk.num_challenges = num_challenges;
    vk.instance = instance;
    return {std::move(pk), std::move(vk)};
}

namespace detail {

ProofBundle prove_unchecked(const ProvingKey& pk, const r1cs::Witness& witness) {
    const r1cs::R1CSInstance& inst = pk.instance;
    if (inst.constraints.empty())
        throw WagonError(ErrorCode::EmptyCircuit, "cannot prove an empty circuit");
    if (witness.assignment.size() != inst.num_wires)
        throw WagonError(ErrorCode::LengthMismatch, "witness length mismatch");

    std::vector<Digest> leaves(inst.num_wires);
    for (std::uint32_t i = 0; i < inst.num_wires; ++i)
        leaves[i] = leaf_hash(i, witness.assignment[i]);
    merkle::Tree tree(std::move(leaves));

    std::vector<std::uint64_t> pubs(witness.assignment.begin() + 1,
                                    witness.assignment.begin() + inst.num_public);
    std::vector<std::size_t> indices = derive_challenges(
        inst.circuit_digest(), tree.root(), pubs, inst.constraints.size(), pk.num_challenges);

    std::vector<ChallengeOpenings> challenges;
    challenges.reserve(indices.size());
    for (std::size_t idx : indices) {
        ChallengeOpenings ch;
        ch.constraint_index = idx;
        for (std::uint32_t wire : row_support(inst.constraints[idx])) {
            Opening op;
            op.wire = wire;
            op.value = witness.assignment[wire];
            op.path = tree.path(wire);
            ch.openings.push_back(std::move(op));
        }
        challenges.push_back(std::move(ch));
    }

    ProofBundle bundle;
    bundle.scheme = kScheme;
    bundle.circuit_version = inst.circuit_version;
    bundle.proof = encode_proof(tree.root(), challenges);
    for (auto v : pubs) bundle.public_inputs.push_back(std::to_string(v));
    return bundle;
}

}  // namespace detail

ProofBundle prove(const ProvingKey& pk, const r1cs::Witness& witness) {
    auto sat = r1cs::check_satisfaction(pk.instance, witness);
    if (!sat.ok)
        throw WagonError(ErrorCode::UnsatisfiedWitness,
                         "witness violates constraint " + std::to_string(*sat.first_violated));
    return detail::prove_unchecked(pk, witness);
}

VerifyResult verify(const VerificationKey& vk, const ProofBundle& bundle) {
    auto reject = [](const std::string& reason) { return VerifyResult{false, reason}; };
    const r1cs::R1CSInstance& inst = vk.instance;

    if (bundle.scheme != kScheme) return reject("SchemeMismatch");
    if (bundle.circuit_version != inst.circuit_version) return reject("CircuitMismatch");
    if (vk.circuit_digest != inst.circuit_digest()) return reject("CircuitMismatch");

    std::vector<std::uint64_t> pubs;
    Field field(inst.modulus);
    for (const std::string& s : bundle.public_inputs) {
        try {
            std::size_t used = 0;
            std::uint64_t v = std::stoull(s, &used);
            if (used != s.size() || v >= inst.modulus) return reject("MalformedProof");
            pubs.push_back(v);
        } catch (const std::logic_error&) {
            return reject("MalformedProof");
        }
    }
    if (pubs.size() != inst.num_public - 1) return reject("MalformedProof");

    auto decoded = decode_proof(bundle.proof);
    if (!decoded) return reject("MalformedProof");
    if (decoded->challenges.size() != vk.num_challenges) return reject("MalformedProof");

    std::vector<std::size_t> expected = derive_challenges(
        vk.circuit_digest, decoded->root, pubs, inst.constraints.size(), vk.num_challenges);
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (decoded->challenges[i].constraint_index != expected[i]) return reject("BadTranscript");

    for (const ChallengeOpenings& ch : decoded->challenges) {
        std::map<std::uint64_t, std::uint64_t> opened;
        for (const Opening& op : ch.openings) {
            if (op.wire >= inst.num_wires || op.value >= inst.modulus)
                return reject("MalformedProof");
            if (!merkle::verify_path(leaf_hash(op.wire, op.value), op.wire, op.path, decoded->root))
                return reject("BadAuthentication");
            if (op.wire == 0 && op.value != 1) return reject("PublicInputMismatch");
            if (op.wire > 0 && op.wire < inst.num_public && op.value != pubs[op.wire - 1])
                return reject("PublicInputMismatch");
            opened[op.wire] = op.value;
        }
        opened[0] = 1;
        for (std::size_t i = 0; i < pubs.size(); ++i) opened[i + 1] = pubs[i];
        const r1cs::Constraint& c = inst.constraints[ch.constraint_index];
        auto eval = [&](const r1cs::SparseRow& row, std::uint64_t& out) {
            std::uint64_t acc = 0;
            for (const auto& [idx, coeff] : row) {
                auto it = opened.find(idx);
                if (it == opened.end()) return false;
                acc = field.add(acc, field.mul(coeff, it->second));
            }
            out = acc;
            return true;
        };
        std::uint64_t a = 0, b = 0, cc = 0;
        if (!eval(c.a, a) || !eval(c.b, b) || !eval(c.c, cc)) return reject("MalformedProof");
        if (field.mul(a, b) != cc) return reject("ConstraintViolated");
    }
    return {true, ""};
}

std::string ProvingKey::to_json() const {
    json j;
    j["hash_id"] = hash_id;
    j["merkle_arity"] = merkle_arity;
    j["num_challenges"] = num_challenges;
    j["instance"] = json::parse(instance.to_json());
    return j.dump();
}

ProvingKey ProvingKey::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        ProvingKey pk;
        pk.hash_id = j.at("hash_id").get<std::string>();
        pk.merkle_arity = j.at("merkle_arity").get<unsigned>();
        pk.num_challenges = j.at("num_challenges").get<unsigned>();
        pk.instance = r1cs::R1CSInstance::from_json(j.at("instance").dump());
        return pk;
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("proving key: ") + e.what());
    }
}

std::string VerificationKey::to_json() const {
    json j;
    j["circuit_digest"] = to_hex(circuit_digest);
    j["hash_id"] = hash_id;
    j["num_challenges"] = num_challenges;
    j["num_public"] = num_public;
    j["num_wires"] = num_wires;
    j["instance"] = json::parse(instance.to_json());
    return j.dump();
}

VerificationKey VerificationKey::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        VerificationKey vk;
        Bytes digest = from_hex(j.at("circuit_digest").get<std::string>());
        if (digest.size() != 32)
            throw WagonError(ErrorCode::MalformedGraph, "verification key digest must be 32 bytes");
        std::copy(digest.begin(), digest.end(), vk.circuit_digest.begin());
        vk.hash_id = j.at("hash_id").get<std::string>();
        vk.num_challenges = j.at("num_challenges").get<unsigned>();
        vk.num_public = j.at("num_public").get<std::uint32_t>();
        vk.num_wires = j.at("num_wires").get<std::uint32_t>();
        vk.instance = r1cs::R1CSInstance::from_json(j.at("instance").dump());
        return vk;
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("verification key: ") + e.what());
    }
}

std::string ProofBundle::to_json() const {
    json j;
    j["scheme"] = scheme;
    j["circuit_version"] = circuit_version;
    j["proof"] = to_hex(proof);
    j["public_inputs"] = public_inputs;
    if (signature) j["signature"] = *signature;
    return j.dump();
}

ProofBundle ProofBundle::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        ProofBundle b;
        b.scheme = j.at("scheme").get<std::string>();
        b.circuit_version = j.at("circuit_version").get<std::string>();
        b.proof = from_hex(j.at("proof").get<std::string>());
        b.public_inputs = j.at("public_inputs").get<std::vector<std::string>>();
        if (j.contains("signature")) b.signature = j.at("signature").get<std::string>();
        return b;
    } catch (const json::exception& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("proof bundle: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw WagonError(ErrorCode::MalformedGraph, std::string("proof bundle: ") + e.what());
    }
}

}  // namespace wagon::proof
