/** DOM wiring: two pages (estimation, inference), live previews, results.
 *
 * All numerical content comes from the /v1 service; this module only moves
 * values between form fields, request payloads, and display elements.
 */

import { ApiClient, ApiFailure, isAbort } from "./api.js";
import { lineChart } from "./charts.js";
import { estimationDisplay, inferenceDisplay, infeasibleBanner, wireNumber } from "./format.js";
import { GUIDE } from "./guide.js";
import {
  defaultForm, designPayload, effectPayload, exportForm, FAMILY_PARAMS,
  FormState, importForm, SLOT_FAMILIES, validateForm,
} from "./schema.js";
import type { EstimationResponse, InferenceResponse, PreviewResponse } from "./types.js";

type Page = "estimation" | "inference";

const PREVIEW_DEBOUNCE_MS = 150;

class App {
  form: FormState = defaultForm();
  page: Page = "estimation";
  stale = false;
  private previewTimer: number | undefined;

  constructor(private root: HTMLElement, private api: ApiClient) {}

  start(): void {
    this.renderShell();
    this.renderForm();
    this.schedulePreview();
  }

  private el<T extends HTMLElement>(sel: string): T {
    const node = this.root.querySelector(sel);
    if (!node) throw new Error(`missing element ${sel}`);
    return node as T;
  }

  private renderShell(): void {
    this.root.innerHTML = `
      <header>
        <h1>Period-prevalent cohort designer</h1>
        <nav>
          <button id="tab-estimation" class="tab active">Estimation</button>
          <button id="tab-inference" class="tab">Inference</button>
        </nav>
      </header>
      <div id="banner" class="banner hidden"></div>
      <main>
        <section class="panel" id="form-panel">
          <h2>Study parameters <button id="guide-toggle" type="button">Guide</button></h2>
          <div id="guide" class="guide hidden"></div>
          <form id="design-form"></form>
          <div class="actions">
            <button id="find" type="button" class="primary">Find Optimal Cohort</button>
            <button id="export" type="button">Export parameters</button>
            <label class="import-label">Import<input id="import" type="file" accept=".json"></label>
          </div>
        </section>
        <section class="panel" id="preview-panel">
          <h2>Input previews</h2>
          <div id="previews" class="charts"></div>
        </section>
        <section class="panel" id="result-panel">
          <h2>Optimal cohort <span id="stale-badge" class="badge hidden">stale: parameters edited</span></h2>
          <div id="results">Submit the form to compute the optimal mix.</div>
          <div id="result-charts" class="charts"></div>
        </section>
      </main>`;
    this.el<HTMLButtonElement>("#tab-estimation").addEventListener("click", () => this.setPage("estimation"));
    this.el<HTMLButtonElement>("#tab-inference").addEventListener("click", () => this.setPage("inference"));
    this.el<HTMLButtonElement>("#find").addEventListener("click", () => void this.findOptimal());
    this.el<HTMLButtonElement>("#export").addEventListener("click", () => this.doExport());
    this.el<HTMLInputElement>("#import").addEventListener("change", (ev) => void this.doImport(ev));
    this.el<HTMLButtonElement>("#guide-toggle").addEventListener("click", () => {
      this.el("#guide").classList.toggle("hidden");
    });
    const guide = this.el("#guide");
    guide.innerHTML = Object.entries(GUIDE)
      .map(([key, text]) => `<p><strong>${key}</strong>: ${text}</p>`)
      .join("");
  }

  private setPage(page: Page): void {
    this.page = page;
    this.el("#tab-estimation").classList.toggle("active", page === "estimation");
    this.el("#tab-inference").classList.toggle("active", page === "inference");
    this.renderForm();
  }

  private scalarField(name: keyof FormState, label: string): string {
    return `
      <label class="field" title="${GUIDE[name as string] ?? ""}">
        <span>${label}</span>
        <input data-field="${name}" value="${this.form[name]}">
        <em class="error" data-error="${name}"></em>
      </label>`;
  }

  private distributionBlock(slot: string, label: string): string {
    const dist = (this.form as unknown as Record<string, { family: string; params: Record<string, string> }>)[slot];
    const fams = SLOT_FAMILIES[slot]
      .map((f) => `<option value="${f}" ${f === dist.family ? "selected" : ""}>${f}</option>`)
      .join("");
    const params = FAMILY_PARAMS[dist.family]
      .map((p) => `
        <label class="param">
          <span>${p}</span>
          <input data-dist="${slot}" data-param="${p}" value="${dist.params[p] ?? ""}">
          <em class="error" data-error="${slot}.${p}"></em>
        </label>`)
      .join("");
    return `
      <fieldset class="dist" title="${GUIDE[slot] ?? ""}">
        <legend>${label}</legend>
        <select data-family="${slot}">${fams}</select>
        <div class="params">${params}</div>
        <em class="error" data-error="${slot}"></em>
      </fieldset>`;
  }

  private renderForm(): void {
    const formEl = this.el<HTMLFormElement>("#design-form");
    const inferenceExtras = this.page === "inference"
      ? `
        <fieldset class="dist" title="${GUIDE.effect}">
          <legend>effect (alternative hypothesis)</legend>
          ${this.scalarField("logHr", "log hazard ratio")}
          ${this.scalarField("predictorVariance", "predictor variance")}
          ${this.scalarField("rSquared", "adjustment R-squared")}
          ${this.scalarField("alpha", "significance level")}
        </fieldset>`
      : "";
    formEl.innerHTML = `
      ${this.scalarField("theta", "active window length (theta)")}
      ${this.scalarField("tau", "assessment upper bound (tau)")}
      ${this.scalarField("n", "total sample size (n)")}
      ${this.distributionBlock("survival", "survival time")}
      ${this.distributionBlock("arrival", "prevalent entry time")}
      ${this.distributionBlock("incident_entry", "incident entry fraction")}
      ${this.distributionBlock("weight", "precision weight")}
      <label class="field checkbox">
        <input type="checkbox" data-toggle="dropout" ${this.form.dropoutEnabled ? "checked" : ""}>
        <span>non-administrative dropout</span>
      </label>
      ${this.form.dropoutEnabled ? this.distributionBlock("dropout", "dropout time") : ""}
      ${inferenceExtras}`;

    formEl.querySelectorAll<HTMLInputElement>("input[data-field]").forEach((input) => {
      input.addEventListener("input", () => {
        (this.form as unknown as Record<string, unknown>)[input.dataset.field!] = input.value;
        this.onEdited();
      });
    });
    formEl.querySelectorAll<HTMLInputElement>("input[data-dist]").forEach((input) => {
      input.addEventListener("input", () => {
        const slot = input.dataset.dist!;
        const dist = (this.form as unknown as Record<string, { params: Record<string, string> }>)[slot];
        dist.params[input.dataset.param!] = input.value;
        this.onEdited();
      });
    });
    formEl.querySelectorAll<HTMLSelectElement>("select[data-family]").forEach((sel) => {
      sel.addEventListener("change", () => {
        const slot = sel.dataset.family!;
        const dist = (this.form as unknown as Record<string, { family: string; params: Record<string, string> }>)[slot];
        dist.family = sel.value;
        dist.params = {};
        this.renderForm();
        this.onEdited();
      });
    });
    const toggle = formEl.querySelector<HTMLInputElement>("input[data-toggle=dropout]");
    toggle?.addEventListener("change", () => {
      this.form.dropoutEnabled = toggle.checked;
      this.renderForm();
      this.onEdited();
    });
    this.refreshValidity();
  }

  private onEdited(): void {
    this.stale = true;
    this.el("#stale-badge").classList.remove("hidden");
    this.refreshValidity();
    this.schedulePreview();
  }

  private refreshValidity(): void {
    const errors = validateForm(this.form, this.page);
    this.root.querySelectorAll<HTMLElement>("[data-error]").forEach((el) => {
      el.textContent = errors[el.dataset.error!] ?? "";
    });
    this.el<HTMLButtonElement>("#find").disabled = Object.keys(errors).length > 0;
  }

  private schedulePreview(): void {
    if (Object.keys(validateForm(this.form, "estimation")).length > 0) return;
    window.clearTimeout(this.previewTimer);
    this.previewTimer = window.setTimeout(() => void this.refreshPreview(), PREVIEW_DEBOUNCE_MS);
  }

  private async refreshPreview(): Promise<void> {
    try {
      const resp = await this.api.post<PreviewResponse>(
        "preview", "/v1/preview", { design: designPayload(this.form) });
      this.el("#previews").innerHTML =
        lineChart("survival S(t)", resp.grid,
                  [{ label: "S", values: resp.survival, color: "#155e9c" }]) +
        lineChart("arrival cdf H(t)", resp.grid,
                  [{ label: "H", values: resp.arrival_cdf, color: "#9c4f15" }]) +
        lineChart("weight W(t)", resp.grid,
                  [{ label: "W", values: resp.weight, color: "#2e7d32" }]);
      this.clearBanner();
    } catch (err) {
      if (isAbort(err)) return;
      if (err instanceof ApiFailure) this.showFieldFailure(err);
      else this.showBanner(`service unreachable: ${String(err)}`);
    }
  }

  private async findOptimal(): Promise<void> {
    this.clearBanner();
    try {
      if (this.page === "estimation") {
        const resp = await this.api.post<EstimationResponse>(
          "optimize", "/v1/optimize/estimation", { design: designPayload(this.form) });
        this.renderEstimation(resp);
      } else {
        const resp = await this.api.post<InferenceResponse>(
          "optimize", "/v1/optimize/inference",
          { design: designPayload(this.form), effect: effectPayload(this.form),
            alpha: Number(this.form.alpha) });
        this.renderInference(resp);
      }
      this.stale = false;
      this.el("#stale-badge").classList.add("hidden");
    } catch (err) {
      if (isAbort(err)) return;
      if (err instanceof ApiFailure && err.status === 422) {
        this.showBanner(infeasibleBanner(err.body.error));
      } else if (err instanceof ApiFailure) {
        this.showFieldFailure(err);
      } else {
        this.showBanner(`service unreachable: ${String(err)}`);
      }
    }
  }

  private renderEstimation(resp: EstimationResponse): void {
    const d = estimationDisplay(resp);
    this.el("#results").innerHTML = `
      <p class="headline">${d.headline}</p>
      <p>${d.mixLine}</p>
      ${d.boundaryNote ? `<p>${d.boundaryNote}</p>` : ""}
      <ul>${d.areLines.map((l) => `<li>${l}</li>`).join("")}</ul>`;
    const curves = resp.curves;
    this.el("#result-charts").innerHTML = lineChart(
      "variance of the survival estimate (x1000)", curves.grid,
      [
        { label: "optimal mix", color: "#155e9c",
          values: curves.optimal.map((v) => scale1000(v)) },
        { label: "even mix (50/50)", color: "#c62828",
          values: curves.even_mix.map((v) => scale1000(v)) },
      ]);
  }

  private renderInference(resp: InferenceResponse): void {
    const d = inferenceDisplay(resp);
    this.el("#results").innerHTML = `
      <p class="headline">${d.headline}</p>
      <p>${d.criterionLine}</p>
      <p>${d.failuresLine}</p>
      <p>${d.powerLine}</p>`;
    this.el("#result-charts").innerHTML = "";
  }

  private doExport(): void {
    const blob = new Blob([exportForm(this.form)], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "cohortmix-parameters.json";
    a.click();
    URL.revokeObjectURL(a.href);
  }

  private async doImport(ev: Event): Promise<void> {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      this.form = importForm(await file.text());
      this.renderForm();
      this.onEdited();
    } catch (err) {
      this.showBanner(String(err));
    } finally {
      input.value = "";
    }
  }

  private showBanner(text: string): void {
    const banner = this.el("#banner");
    banner.textContent = text;
    banner.classList.remove("hidden");
  }

  private showFieldFailure(err: ApiFailure): void {
    this.showBanner(err.body.error ?? `request failed (${err.status})`);
  }

  private clearBanner(): void {
    this.el("#banner").classList.add("hidden");
  }
}

function scale1000(v: number | "inf" | "-inf" | null): number | null {
  const x = wireNumber(v);
  return Number.isFinite(x) ? 1000 * x : null;
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!, "http://127.0.0.1:8321");
}
