import pytest

from refactormirror.errors import NoCodeInResponse, ProviderError
from refactormirror.gateway import (
    ReplayProvider,
    RecordedResponse,
    complete,
    complete_prompt,
    extract_code,
    make_provider,
    prompt_key,
    seed_replay_store,
)
from refactormirror.prompts import PromptSpec, render


def test_extract_code_prefers_the_longest_block():
    response = "First:\n```java\nint a;\n```\nThen the whole class:\n```java\nclass A {\n    int a;\n}\n```\nDone."
    assert extract_code(response) == "class A {\n    int a;\n}\n"


def test_extract_code_takes_the_last_block_on_a_tie():
    response = "```\nint a;\n```\n```java\nint b;\n```\n"
    assert extract_code(response) == "int b;\n"


def test_extract_code_without_fence():
    with pytest.raises(NoCodeInResponse):
        extract_code("I would keep the method as it is.")


@pytest.mark.asyncio
async def test_replay_provider_serves_what_was_recorded(tmp_path):
    store = ReplayProvider(tmp_path)
    path = store.record("prompt text", "```java\nclass A {\n}\n```\n")
    assert path.name == f"{prompt_key('prompt text')}.json"
    reply = await store.complete("system", "prompt text")
    assert reply.text.startswith("```java")
    with pytest.raises(ProviderError):
        await store.complete("system", "another prompt")


@pytest.mark.asyncio
async def test_complete_prompt_keeps_prose_replies(tmp_path):
    store = ReplayProvider(tmp_path)
    store.record("p", "No change needed.")
    exchange = await complete_prompt("p", store)
    assert exchange.code is None
    assert exchange.response == "No change needed."
    assert exchange.key == prompt_key("p")


@pytest.mark.asyncio
async def test_complete_renders_and_extracts(tmp_path, entry):
    e = entry("s02")
    spec = PromptSpec(template="P2", refactoring_type=e.refactoring_type, code=e.code_before)
    store = ReplayProvider(tmp_path)
    store.record(render(spec), f"```java\n{e.code_expected}```")
    exchange = await complete(spec, store)
    assert exchange.code == e.code_expected
    store.record(render(spec), "Nothing to do.")
    with pytest.raises(NoCodeInResponse):
        await complete(spec, store)


def test_seed_replay_store_skips_unknown_entries(tmp_path):
    store = ReplayProvider(tmp_path)
    prompts = {("s01", "P2"): "prompt one"}
    paths = seed_replay_store(store, prompts, [
        RecordedResponse(entry_id="s01", template="P2", response="```\nx\n```"),
        RecordedResponse(entry_id="s09", template="P2", response="```\ny\n```"),
    ])
    assert paths == [store.path_for("prompt one")]


def test_make_provider(tmp_path):
    assert isinstance(make_provider("replay", replay_dir=tmp_path), ReplayProvider)
    with pytest.raises(ProviderError):
        make_provider("carrier-pigeon")
    with pytest.raises(ProviderError):
        make_provider("http", endpoint=None)
