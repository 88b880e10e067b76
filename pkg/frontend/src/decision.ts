/** Approve/block form. Block is disabled until a reason is chosen, and
 * only one submission per entry can be in flight. */

import { Action, REASONS, Reason } from "./api.js";

export type SubmitHandler = (action: Action, reason?: Reason) => Promise<void>;

export interface DecisionForm {
  root: HTMLElement;
  approveButton: HTMLButtonElement;
  blockButton: HTMLButtonElement;
  reasonSelect: HTMLSelectElement;
}

export function createDecisionForm(onSubmit: SubmitHandler): DecisionForm {
  const root = document.createElement("div");
  root.className = "decision-form";

  const approveButton = document.createElement("button");
  approveButton.type = "button";
  approveButton.className = "approve";
  approveButton.textContent = "Approve";

  const reasonSelect = document.createElement("select");
  reasonSelect.className = "reason";
  const placeholder = document.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "reason…";
  reasonSelect.appendChild(placeholder);
  for (const reason of REASONS) {
    const option = document.createElement("option");
    option.value = reason;
    option.textContent = reason;
    reasonSelect.appendChild(option);
  }

  const blockButton = document.createElement("button");
  blockButton.type = "button";
  blockButton.className = "block";
  blockButton.textContent = "Block";
  blockButton.disabled = true; // no reason chosen yet

  reasonSelect.addEventListener("change", () => {
    blockButton.disabled = inFlight || reasonSelect.value === "";
  });

  let inFlight = false;
  const setBusy = (busy: boolean): void => {
    inFlight = busy;
    approveButton.disabled = busy;
    blockButton.disabled = busy || reasonSelect.value === "";
    reasonSelect.disabled = busy;
  };

  const submit = async (action: Action, reason?: Reason): Promise<void> => {
    if (inFlight) return;
    setBusy(true);
    try {
      await onSubmit(action, reason);
    } finally {
      setBusy(false);
    }
  };

  approveButton.addEventListener("click", () => {
    void submit("approve");
  });
  blockButton.addEventListener("click", () => {
    const reason = reasonSelect.value as Reason | "";
    if (reason === "") return; // invariant: never block without a reason
    void submit("block", reason);
  });

  root.append(approveButton, reasonSelect, blockButton);
  return { root, approveButton, blockButton, reasonSelect };
}
