//! Hand-scripted page histories with their annotations.

use super::sim::{Reinsert, Sim};

type Script = fn(&mut Sim);

fn single_thread(s: &mut Sim) {
    let h = s.heading("Lead paragraph");
    let a = s.comment(h, "The lead is far too long for an article this size");
    let b = s.reply(a, "Agreed, I would cut the second paragraph");
    s.reply(b, "The second paragraph has the only sourced claim though");
    s.reply(a, "I trimmed it a little, see the history");
}

fn walkthrough(s: &mut Sim) {
    let h = s.heading("Article cleanup");
    let c = s.comment(h, "I think the lead needs work.");
    let r = s.reply(c, "Agreed, I can take a look.");
    let bad = s.reply(r, "You are both idiots.");
    s.delete(&[bad]);
    s.modify(c, "badly");
}

fn two_sections(s: &mut Sim) {
    let a = s.heading("Infobox image");
    let b = s.heading("Population figures");
    let x = s.comment(a, "The infobox image is a copyright problem");
    let y = s.comment(b, "Census numbers are from 2001, is there anything newer");
    s.reply(
        x,
        "It was uploaded under a free license as far as I can tell",
    );
    s.reply(y, "The 2011 census has them, I will update");
    s.comment(a, "Replaced it with a different photo anyway");
}

fn preamble(s: &mut Sim) {
    s.preamble("This page is for discussing improvements to the article");
    let h = s.heading("First real topic");
    s.comment(h, "Does anyone have access to the original report");
    s.preamble("Please sign your comments with four tildes");
}

fn preamble_replies(s: &mut Sim) {
    let p = s.preamble("Old unsectioned remark about the spelling of the name");
    s.reply(p, "Both spellings appear in the sources");
    let h = s.heading("Spelling");
    s.comment(h, "Moving the spelling discussion into its own section");
}

fn modification_chain(s: &mut Sim) {
    let h = s.heading("Neutral point of view");
    let c = s.comment(h, "The criticism section reads like an essay");
    s.modify(c, "honestly");
    s.modify(c, "overall");
    s.reply(c, "I rewrote a few sentences to be more neutral");
}

fn heading_modified(s: &mut Sim) {
    let h = s.heading("Requested move");
    let c = s.comment(h, "Propose renaming to the common English name");
    s.modify(h, "discussion");
    s.reply(c, "Support, the current title is rarely used");
    s.comment(h, "Closing as moved after seven days");
}

fn delete_and_restore(s: &mut Sim) {
    let h = s.heading("Vandalism");
    let a = s.comment(h, "Someone keeps adding the same unsourced claim");
    let b = s.reply(a, "I have asked for semi protection of the page");
    s.delete(&[b]);
    s.restore(b, Some(a));
    s.reply(a, "Protection was granted for one week");
}

fn restoration_after_many_deletions(s: &mut Sim) {
    let h = s.heading("Long running dispute");
    let keep = s.comment(h, "Anchor comment that never goes away at all");
    let target = s.reply(keep, "This remark will be removed and later put back");
    s.delete(&[target]);
    s.churn(h, 60, "alpha");
    s.restore(target, Some(keep));
}

fn evicted_store(s: &mut Sim) {
    let h = s.heading("Archive candidates");
    let keep = s.comment(h, "Keeping this one here as a fixed point");
    let target = s.reply(keep, "A reply that falls out of memory eventually");
    s.delete(&[target]);
    s.churn(h, 101, "beta");
    s.reinsert(
        &[target],
        Some(keep),
        &[Reinsert::Fresh {
            replyto: Some(keep),
        }],
    );
}

fn short_text(s: &mut Sim) {
    let h = s.heading("Typo");
    let c = s.comment(h, "There is a typo in the second sentence of the history");
    let short = s.reply(c, "Fixed.");
    s.delete(&[short]);
    s.reinsert(&[short], Some(c), &[Reinsert::Fresh { replyto: Some(c) }]);
}

fn section_cascade(s: &mut Sim) {
    let a = s.heading("Spam links section");
    let c1 = s.comment(a, "Buy cheap things at this wonderful external site");
    s.reply(c1, "This is spam, please remove it");
    s.reply(c1, "Reported the account to the noticeboard");
    let b = s.heading("Actual discussion");
    s.comment(b, "Back to the content question from last week");
    s.delete_section(a);
    s.comment(b, "Thanks for cleaning up the spam above");
}

fn section_restore(s: &mut Sim) {
    let a = s.heading("Removed by mistake");
    let c = s.comment(a, "A perfectly good question about the sources");
    s.reply(c, "And a perfectly good answer with a citation");
    let b = s.heading("Later section");
    s.comment(b, "Unrelated comment in a later section");
    let keys = s.section_keys(a);
    s.delete_section(a);
    let how = vec![Reinsert::Restoration; keys.len()];
    s.reinsert(&keys, None, &how);
}

fn deep_nesting(s: &mut Sim) {
    let h = s.heading("Deep thread");
    let mut p = s.comment(h, "Starting a thread that will nest deeply");
    for i in 0..6 {
        p = s.reply(
            p,
            &format!("Nested answer at level {} of the thread", i + 1),
        );
    }
    s.comment(h, "Outdenting to start over at the top level");
}

fn replies_to_old_comments(s: &mut Sim) {
    let h = s.heading("Multiple branches");
    let a = s.comment(h, "First branch opener about the infobox");
    let b = s.comment(h, "Second branch opener about the references");
    let c = s.comment(h, "Third branch opener about the categories");
    s.reply(b, "Answering the second branch in the middle");
    s.reply(a, "Answering the first branch at the top");
    let d = s.reply(b, "Another answer to the second branch");
    s.reply(c, "Answering the third branch at the bottom");
    s.reply(d, "Nested under the second answer to branch two");
}

fn delete_reply_then_new_reply(s: &mut Sim) {
    let h = s.heading("Reverted edit");
    let a = s.comment(h, "Why was my edit to the history section reverted");
    let r = s.reply(a, "Because the source you cited is a blog post");
    s.delete(&[r]);
    s.reply(
        a,
        "The source was a blog, see the reliable sources guideline",
    );
}

fn unicode(s: &mut Sim) {
    let h = s.heading("Überprüfung der Quellen");
    let a = s.comment(h, "Die Quelle für das Geburtsdatum fehlt noch");
    s.reply(a, "Ich habe eine gefunden: Müller 2003, S. 42");
    s.modify(a, "leider");
    s.comment(h, "日本語の出典も追加しました");
}

fn modify_then_delete(s: &mut Sim) {
    let h = s.heading("Heated exchange");
    let a = s.comment(h, "You clearly did not read the sources at all");
    s.modify(a, "carefully");
    s.reply(a, "Please assume good faith here");
    s.delete(&[a]);
}

fn restore_modified(s: &mut Sim) {
    let h = s.heading("Restored after edit");
    let a = s.comment(h, "Original wording of an important comment");
    s.modify(a, "revised");
    s.delete(&[a]);
    s.restore(a, Some(h));
    s.reply(a, "Glad this came back");
}

fn markup_bodies(s: &mut Sim) {
    let h = s.heading("Formatting");
    let a = s.comment(
        h,
        "See [[Manual of Style|the style guide]] for '''bold''' usage",
    );
    s.reply(
        a,
        "The {{cite web}} template is preferred over bare [[URL]]s",
    );
    s.comment(h, "Per [[WP:BOLD]] I just went ahead and changed it");
}

fn blanking_and_revert(s: &mut Sim) {
    let h = s.heading("Page blanked");
    let a = s.comment(h, "The first comment before the page was blanked");
    let b = s.reply(a, "The second comment before the page was blanked");
    let c = s.comment(h, "The third comment before the page was blanked");
    s.delete(&[a, b, c]);
    s.reinsert(&[a, b, c], Some(h), &[Reinsert::Restoration; 3]);
}

fn earlier_section_growth(s: &mut Sim) {
    let a = s.heading("Older section");
    let b = s.heading("Newer section");
    let x = s.comment(b, "Activity in the newer section first");
    let y = s.comment(a, "Late comment in the older section");
    s.reply(y, "Reply in the older section");
    s.reply(x, "Reply in the newer section");
    s.comment(a, "Another late top level comment in the older one");
}

fn heading_restoration(s: &mut Sim) {
    let a = s.heading("Recurring questions");
    let b = s.heading("Second topic header");
    let x = s.comment(b, "Comment under the second topic header");
    s.delete(&[b]);
    s.restore(b, Some(a));
    s.reply(x, "Reply after the header came back");
}

fn mixed_everything(s: &mut Sim) {
    let p = s.preamble("Talk page guidelines apply to everyone here");
    let h = s.heading("Merge proposal");
    let a = s.comment(h, "Propose merging the stub article into this one");
    let b = s.reply(a, "Oppose, the subject is independently notable");
    s.modify(b, "clearly");
    let c = s.reply(b, "Notability is not inherited, as you know");
    s.delete(&[c]);
    s.restore(c, Some(b));
    s.delete(&[p]);
    let g = s.heading("Unrelated question");
    s.comment(g, "Is the population figure in the infobox current");
}

pub const HISTORIES: &[(&str, Script)] = &[
    ("single_thread", single_thread),
    ("walkthrough", walkthrough),
    ("two_sections", two_sections),
    ("preamble", preamble),
    ("preamble_replies", preamble_replies),
    ("modification_chain", modification_chain),
    ("heading_modified", heading_modified),
    ("delete_and_restore", delete_and_restore),
    (
        "restoration_after_many_deletions",
        restoration_after_many_deletions,
    ),
    ("evicted_store", evicted_store),
    ("short_text", short_text),
    ("section_cascade", section_cascade),
    ("section_restore", section_restore),
    ("deep_nesting", deep_nesting),
    ("replies_to_old_comments", replies_to_old_comments),
    ("delete_reply_then_new_reply", delete_reply_then_new_reply),
    ("unicode", unicode),
    ("modify_then_delete", modify_then_delete),
    ("restore_modified", restore_modified),
    ("markup_bodies", markup_bodies),
    ("blanking_and_revert", blanking_and_revert),
    ("earlier_section_growth", earlier_section_growth),
    ("heading_restoration", heading_restoration),
    ("mixed_everything", mixed_everything),
];

/// Runs every script on its own page, numbered from 1.
pub fn histories() -> Vec<(&'static str, Sim)> {
    HISTORIES
        .iter()
        .enumerate()
        .map(|(i, (name, script))| {
            let mut s = Sim::new(i as u64 + 1, &format!("Talk:Fixture {name}"));
            script(&mut s);
            (*name, s)
        })
        .collect()
}
