/** URL-hash state: everything needed to reproduce a view is encoded in the
 * fragment, so any screen is a shareable deep link and survives reload.
 *
 *   #/detections?class=dos&page=2
 *   #/detections/01H.../?session=01H...&tab=chat
 */

export type Tab = "inspect" | "explain" | "chat";

export interface AppState {
  view: "list" | "detail";
  id?: string;
  session?: string;
  tab?: Tab;
  class?: string;
  genre?: string;
  is_anomalous?: boolean;
  page: number;
}

export const DEFAULT_STATE: AppState = { view: "list", page: 1 };

export function encodeState(state: AppState): string {
  const params = new URLSearchParams();
  let path = "/detections";
  if (state.view === "detail" && state.id) {
    path += `/${encodeURIComponent(state.id)}`;
    if (state.session) params.set("session", state.session);
    if (state.tab) params.set("tab", state.tab);
  } else {
    if (state.class) params.set("class", state.class);
    if (state.genre) params.set("genre", state.genre);
    if (state.is_anomalous !== undefined) {
      params.set("is_anomalous", String(state.is_anomalous));
    }
    if (state.page > 1) params.set("page", String(state.page));
  }
  const qs = params.toString();
  return `#${path}${qs ? `?${qs}` : ""}`;
}

export function decodeState(hash: string): AppState {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  const [path, query = ""] = raw.split("?", 2);
  const params = new URLSearchParams(query);
  const match = /^\/detections\/([^/]+)\/?$/.exec(path);
  if (match) {
    const state: AppState = {
      view: "detail",
      id: decodeURIComponent(match[1]),
      page: 1,
    };
    const session = params.get("session");
    if (session) state.session = session;
    const tab = params.get("tab");
    if (tab === "inspect" || tab === "explain" || tab === "chat") {
      state.tab = tab;
    }
    return state;
  }
  const state: AppState = { view: "list", page: 1 };
  const klass = params.get("class");
  if (klass) state.class = klass;
  const genre = params.get("genre");
  if (genre) state.genre = genre;
  const anomalous = params.get("is_anomalous");
  if (anomalous === "true") state.is_anomalous = true;
  if (anomalous === "false") state.is_anomalous = false;
  const page = Number(params.get("page"));
  if (Number.isInteger(page) && page > 1) state.page = page;
  return state;
}
