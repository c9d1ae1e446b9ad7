/** Application wiring: one store, five views, re-render on every state change. */

import { ApiClient } from "./api";
import { Store } from "./state";
import { renderQueryView, QuerySubmit } from "./views/queryView";
import { renderSummaryView } from "./views/summaryView";
import { renderIntentView, renderPreview } from "./views/intentView";
import { renderEvaluationView } from "./views/evaluationView";

export function mountApp(root: HTMLElement, api = new ApiClient()): Store {
  root.innerHTML = `
    <div id="error-banner" class="error-banner" hidden></div>
    <div id="query-view"></div>
    <div class="main-row">
      <div>
        <div id="summary-view"></div>
        <div id="intent-view"></div>
      </div>
      <div>
        <div id="preview-view"></div>
        <div id="evaluation-view"></div>
      </div>
    </div>`;
  const el = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;
  const store = new Store(api);
  let hoveredShot: number | null = null;

  const render = () => {
    const s = store.state;
    const banner = el("error-banner");
    banner.hidden = s.error === null;
    banner.textContent = s.error ?? "";
    renderSummaryView(
      el("summary-view"),
      { scores: s.scores, summary: s.summary, brush: s.brush },
      (t0, t1) => store.setBrush(t0, t1),
    );
    renderIntentView(
      el("intent-view"),
      api,
      { video: s.video, intentProbs: s.intentProbs, intentShotScores: s.intentShotScores },
      {
        onSlider: (i, v) => store.setIntentProb(i, v),
        onHoverShot: (shot) => {
          hoveredShot = shot;
          renderPreview(el("preview-view"), api, s.video, hoveredShot);
        },
      },
    );
    renderPreview(el("preview-view"), api, s.video, hoveredShot);
    renderEvaluationView(el("evaluation-view"), s.evalResult);
  };
  store.subscribe(render);
  render();

  const submit = async (q: QuerySubmit) => {
    try {
      if (q.kind === "text") {
        const res = await api.inferText(q.ckpt, q.video, q.c1, q.c2);
        store.setInference(q.video, `${q.c1} + ${q.c2}`, res);
      } else {
        const res = await api.inferVisual(q.ckpt, q.video, q.shots);
        store.setInference(q.video, `shots [${q.shots[0]}, ${q.shots[q.shots.length - 1] + 1})`, res);
      }
    } catch (err) {
      store.state = { ...store.state, error: String(err) };
      render();
    }
  };

  void api
    .prepare()
    .then((prep) => renderQueryView(el("query-view"), prep, (q) => void submit(q)))
    .catch((err) => {
      store.state = { ...store.state, error: String(err) };
      render();
    });

  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app")!);
}
