#include "deed/content_store.hpp"

#include <sodium.h>

#include <fstream>

#include <nlohmann/json.hpp>

namespace deed::store {

namespace {
constexpr std::string_view kDossierDomain = "deed.dossier.v1";
constexpr std::string_view kWatermarkDomain = "deed.watermark.v1";
constexpr std::string_view kEnvelopeMagic = "deed.envelope.v1";

Result<Bytes> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return err(Errc::IoFailure, "cannot open " + p.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

Result<Unit> write_file(const std::filesystem::path& p, ByteView data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) return err(Errc::IoFailure, "cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) return err(Errc::IoFailure, "short write to " + p.string());
    return Unit{};
}
}  // namespace

std::string MapLocation::str() const {
    return std::to_string(lat_e7) + "," + std::to_string(lon_e7);
}

Bytes PropertyDossier::canonical_bytes() const {
    ByteWriter w;
    w.str(kDossierDomain);
    property_id.encode(w);
    w.str(description);
    w.u32(static_cast<std::uint32_t>(media.size()));
    for (const auto& [label, cid] : media) {
        w.str(label);
        cid.encode(w);
    }
    w.i64(location.lat_e7);
    w.i64(location.lon_e7);
    w.str(maintenance_notes);
    w.u32(static_cast<std::uint32_t>(transfer_history.size()));
    for (const auto& cid : transfer_history) cid.encode(w);
    return w.take();
}

Result<PropertyDossier> PropertyDossier::parse(ByteView data) {
    ByteReader r(data);
    if (r.str() != kDossierDomain)
        return err(Errc::MalformedInput, "not a dossier serialization");
    PropertyDossier d;
    d.property_id = DigestId::decode(r);
    d.description = r.str();
    std::uint32_t n_media = r.u32();
    for (std::uint32_t i = 0; r.ok() && i < n_media; ++i) {
        std::string label = r.str();
        ContentId cid = DigestId::decode(r);
        d.media.emplace_back(std::move(label), cid);
    }
    d.location.lat_e7 = r.i64();
    d.location.lon_e7 = r.i64();
    d.maintenance_notes = r.str();
    std::uint32_t n_hist = r.u32();
    for (std::uint32_t i = 0; r.ok() && i < n_hist; ++i)
        d.transfer_history.push_back(DigestId::decode(r));
    if (!r.at_end()) return err(Errc::MalformedInput, "truncated or oversized dossier");
    return d;
}

Bytes WatermarkRecord::signing_preimage() const {
    ByteWriter w;
    w.str(kWatermarkDomain);
    w.str(owner_name);
    requestor_id.encode(w);
    marketplace_id.encode(w);
    w.u64(issued_at);
    content_ref.encode(w);
    return w.take();
}

ContentId ContentStore::put(ByteView data) {
    ContentId id = digest(data);
    blobs_.emplace(id, Bytes(data.begin(), data.end()));  // no-op when present
    return id;
}

Result<Bytes> ContentStore::get(const ContentId& id) const {
    auto it = blobs_.find(id);
    if (it == blobs_.end()) return err(Errc::NotFound, "no content under " + id.hex());
    if (digest(it->second) != id)
        return err(Errc::DigestMismatch, "stored bytes fail re-verification");
    return it->second;
}

bool ContentStore::contains(const ContentId& id) const {
    return blobs_.count(id) > 0;
}

Result<ContentId> ContentStore::pin_dossier(const PropertyDossier& dossier,
                                            const std::optional<Bytes>& encryption_key) {
    for (const auto& [label, cid] : dossier.media) {
        if (!contains(cid))
            return err(Errc::DanglingMedia, "media \"" + label + "\" not in store");
    }
    for (const auto& cid : dossier.transfer_history) {
        if (!contains(cid))
            return err(Errc::DanglingMedia, "transfer record not in store");
    }
    Bytes body = dossier.canonical_bytes();
    if (encryption_key) {
        auto sealed = encrypt_blob(body, *encryption_key);
        if (!sealed) return sealed.error();
        body = std::move(sealed).value();
    }
    return put(body);
}

Result<WatermarkedContent> ContentStore::get_watermarked(const ContentId& id,
                                                         std::string owner_name,
                                                         const DigestId& requestor_id,
                                                         const DigestId& marketplace_id,
                                                         const ledger::AnchorChain& registry,
                                                         Tick clock) const {
    auto content = get(id);
    if (!content) return content.error();
    auto resolution = registry.resolve(requestor_id);
    if (resolution.status == ledger::Resolution::Status::NotFound)
        return err(Errc::UnknownRequestor, "requestor not anchored on registry");

    WatermarkRecord record;
    record.owner_name = std::move(owner_name);
    record.requestor_id = requestor_id;
    record.marketplace_id = marketplace_id;
    record.issued_at = clock;
    record.content_ref = id;
    record.binding_signature = sign(record.signing_preimage(), operator_key_.private_key);

    ByteWriter w;
    w.str(kEnvelopeMagic);
    w.str(record.owner_name);
    record.requestor_id.encode(w);
    record.marketplace_id.encode(w);
    w.u64(record.issued_at);
    record.content_ref.encode(w);
    w.raw(sig_view(record.binding_signature));
    w.bytes(content.value());
    return WatermarkedContent{w.take(), std::move(record)};
}

Result<std::pair<WatermarkRecord, Bytes>> unwrap_watermarked(ByteView envelope) {
    ByteReader r(envelope);
    if (r.str() != kEnvelopeMagic)
        return err(Errc::MalformedInput, "not a watermark envelope");
    WatermarkRecord record;
    record.owner_name = r.str();
    record.requestor_id = DigestId::decode(r);
    record.marketplace_id = DigestId::decode(r);
    record.issued_at = r.u64();
    record.content_ref = DigestId::decode(r);
    if (!r.take_raw(std::span<std::uint8_t>(record.binding_signature.data(),
                                            record.binding_signature.size())))
        r.fail();
    Bytes content = r.bytes();
    if (!r.at_end()) return err(Errc::MalformedInput, "truncated watermark envelope");
    if (digest(content) != record.content_ref)
        return err(Errc::DigestMismatch, "envelope content does not match its record");
    return std::make_pair(std::move(record), std::move(content));
}

Result<Unit> ContentStore::export_archive(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir / "objects", ec);
    if (ec) return err(Errc::IoFailure, "cannot create " + dir.string());
    nlohmann::ordered_json manifest;
    manifest["entries"] = nlohmann::ordered_json::array();
    for (const auto& [id, bytes] : blobs_) {
        auto res = write_file(dir / "objects" / id.hex(), bytes);
        if (!res) return res.error();
        manifest["entries"].push_back({{"cid", id.hex()}, {"size", bytes.size()}});
    }
    return write_file(dir / "manifest.json", to_bytes(manifest.dump(2) + "\n"));
}

Result<Unit> ContentStore::import_archive(const std::filesystem::path& dir) {
    auto manifest_bytes = read_file(dir / "manifest.json");
    if (!manifest_bytes) return manifest_bytes.error();
    auto manifest = nlohmann::json::parse(
        manifest_bytes.value().begin(), manifest_bytes.value().end(), nullptr, false);
    if (manifest.is_discarded()) return err(Errc::MalformedInput, "bad store manifest");
    for (const auto& entry : manifest.at("entries")) {
        auto cid = DigestId::from_hex(entry.at("cid").get<std::string>());
        if (!cid) return err(Errc::MalformedInput, "bad content id in manifest");
        auto bytes = read_file(dir / "objects" / cid->hex());
        if (!bytes) return bytes.error();
        if (digest(bytes.value()) != *cid)
            return err(Errc::DigestMismatch, "archive object fails re-verification: " + cid->hex());
        blobs_[*cid] = std::move(bytes).value();
    }
    return Unit{};
}

void ContentStore::inject_corruption(const ContentId& id, Bytes bytes) {
    auto it = blobs_.find(id);
    if (it != blobs_.end()) it->second = std::move(bytes);
}

std::vector<ContentId> ContentStore::ids() const {
    std::vector<ContentId> out;
    out.reserve(blobs_.size());
    for (const auto& [id, bytes] : blobs_) out.push_back(id);
    return out;
}

Result<Bytes> encrypt_blob(ByteView plaintext, ByteView key) {
    if (key.size() != crypto_secretbox_KEYBYTES)
        return err(Errc::MalformedInput, "encryption key must be 32 bytes");
    // Nonce derived from key and plaintext keeps sealing deterministic, so
    // pinning the same dossier twice yields the same content id.
    ByteWriter nw;
    nw.str("deed.box.nonce.v1");
    nw.bytes(key);
    nw.bytes(plaintext);
    DigestId nd = digest(nw.data());
    Bytes out(crypto_secretbox_NONCEBYTES + plaintext.size() + crypto_secretbox_MACBYTES);
    std::copy(nd.bytes.begin(), nd.bytes.begin() + crypto_secretbox_NONCEBYTES, out.begin());
    crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(),
                          plaintext.size(), out.data(), key.data());
    return out;
}

Result<Bytes> decrypt_blob(ByteView stored, ByteView key) {
    if (key.size() != crypto_secretbox_KEYBYTES)
        return err(Errc::MalformedInput, "encryption key must be 32 bytes");
    if (stored.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES)
        return err(Errc::MalformedInput, "sealed blob too short");
    Bytes out(stored.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(out.data(), stored.data() + crypto_secretbox_NONCEBYTES,
                                   stored.size() - crypto_secretbox_NONCEBYTES,
                                   stored.data(), key.data()) != 0)
        return err(Errc::DigestMismatch, "decryption failed: wrong key or tampered blob");
    return out;
}

}  // namespace deed::store
