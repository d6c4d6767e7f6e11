"""Download handler: PDFs, text passthrough, failures that don't abort."""

from __future__ import annotations

from readme_ai.handlers.download import download_data
from readme_ai.spec_core import DataSpec


def test_pdf_extraction_sentinel(fixture_site):
    items = download_data(DataSpec.from_items([fixture_site.url("/doc.pdf")]))
    assert len(items) == 1
    item = items[0]
    assert not item.failed
    assert item.origin == "download"
    assert "hello readme ai sentinel" in item.content
    assert "second line of the document" in item.content


def test_pdf_detected_by_magic_without_content_type(fixture_site):
    items = download_data(DataSpec.from_items([fixture_site.url("/untyped.pdf")]))
    assert "hello readme ai sentinel" in items[0].content


def test_text_passthrough(fixture_site):
    items = download_data(DataSpec.from_items([fixture_site.url("/page.txt")]))
    assert items[0].content == "standalone text page"


def test_404_is_error_item_and_batch_continues(fixture_site):
    items = download_data(
        DataSpec.from_items(
            [fixture_site.url("/missing.pdf"), fixture_site.url("/doc.pdf")]
        )
    )
    assert items[0].failed
    assert "HTTP 404" in items[0].error
    assert not items[1].failed
    assert "sentinel" in items[1].content


def test_descriptions_carried(fixture_site):
    spec = DataSpec.from_described([(fixture_site.url("/doc.pdf"), "The design doc")])
    items = download_data(spec)
    assert items[0].description == "The design doc"


def test_unsupported_scheme_is_error_item():
    items = download_data(DataSpec.from_items(["ftp://example.com/doc.pdf"]))
    assert items[0].failed
    assert "scheme" in items[0].error


def test_binary_non_pdf_is_error_item(fixture_site):
    items = download_data(DataSpec.from_items([fixture_site.url("/binary.bin")]))
    assert items[0].failed
    assert "binary" in items[0].error


def test_file_url_pdf(tmp_path, pdf_bytes):
    target = tmp_path / "local.pdf"
    target.write_bytes(pdf_bytes)
    items = download_data(DataSpec.from_items([target.as_uri()]))
    assert "hello readme ai sentinel" in items[0].content


def test_file_url_missing(tmp_path):
    items = download_data(DataSpec.from_items([(tmp_path / "ghost.pdf").as_uri()]))
    assert items[0].failed


def test_connection_refused_is_error_item():
    items = download_data(
        DataSpec.from_items(["http://127.0.0.1:9/doc.pdf"]), timeout=0.5
    )
    assert items[0].failed


def test_custom_extractor_swappable(fixture_site):
    def fake_extractor(_payload: bytes) -> str:
        return "EXTRACTED-BY-STUB"

    items = download_data(
        DataSpec.from_items([fixture_site.url("/doc.pdf")]), extractor=fake_extractor
    )
    assert items[0].content == "EXTRACTED-BY-STUB"


def test_corrupt_pdf_is_error_item(fixture_site, tmp_path):
    corrupt = tmp_path / "bad.pdf"
    corrupt.write_bytes(b"%PDF-1.4\nstream\n\xde\xad\xbe\xef")
    items = download_data(DataSpec.from_items([corrupt.as_uri()]))
    assert items[0].failed
    assert "extraction failed" in items[0].error
